//! Polygamma functions used by the gamma model, plus thin wrappers over
//! `statrs` for log-gamma and the regularized incomplete gamma.

/// Shift argument up to this value before using the asymptotic series.
const ASYMPTOTIC_FROM: f64 = 10.0;

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    statrs::function::gamma::gamma_lr(a, x)
}

/// Trigamma `psi_1(x) = d^2/dx^2 ln Gamma(x)` for `x > 0`.
pub fn trigamma(mut x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut acc = 0.0;
    while x < ASYMPTOTIC_FROM {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let z = 1.0 / x;
    let z2 = z * z;
    // 1/x + 1/2x^2 + sum B_2k / x^(2k+1)
    let series = z
        + 0.5 * z2
        + z * z2
            * (1.0 / 6.0
                + z2 * (-1.0 / 30.0 + z2 * (1.0 / 42.0 + z2 * (-1.0 / 30.0 + z2 * (5.0 / 66.0)))));
    acc + series
}

/// Tetragamma `psi_2(x) = d/dx trigamma(x)` for `x > 0`.
pub fn tetragamma(mut x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut acc = 0.0;
    while x < ASYMPTOTIC_FROM {
        acc -= 2.0 / (x * x * x);
        x += 1.0;
    }
    let z = 1.0 / x;
    let z2 = z * z;
    let series = -z2
        - z * z2
        - z2 * z2
            * (0.5 + z2 * (-1.0 / 6.0 + z2 * (1.0 / 6.0 + z2 * (-3.0 / 10.0 + z2 * (5.0 / 6.0)))));
    acc + series
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn trigamma_known_values() {
        // psi_1(1) = pi^2/6, psi_1(1/2) = pi^2/2, psi_1(2) = pi^2/6 - 1.
        assert!((trigamma(1.0) - PI * PI / 6.0).abs() < 1e-12);
        assert!((trigamma(0.5) - PI * PI / 2.0).abs() < 1e-12);
        assert!((trigamma(2.0) - (PI * PI / 6.0 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn tetragamma_known_values() {
        // psi_2(1) = -2 zeta(3).
        let zeta3 = 1.202_056_903_159_594_3;
        assert!((tetragamma(1.0) + 2.0 * zeta3).abs() < 1e-11);
        assert!((tetragamma(2.0) + 2.0 * zeta3 - 2.0).abs() < 1e-11);
    }

    #[test]
    fn tetragamma_matches_difference_of_trigamma() {
        for &x in &[0.3, 1.7, 4.2, 9.9, 10.1, 35.0] {
            let h = 1e-5 * x;
            let fd = (trigamma(x + h) - trigamma(x - h)) / (2.0 * h);
            assert!((fd - tetragamma(x)).abs() < 1e-6 * tetragamma(x).abs());
        }
    }

    #[test]
    fn trigamma_matches_second_difference_of_ln_gamma() {
        for &x in &[0.8, 2.5, 12.0] {
            let h: f64 = 1e-3;
            let fd = (ln_gamma(x + h) - 2.0 * ln_gamma(x) + ln_gamma(x - h)) / (h * h);
            assert!((fd - trigamma(x)).abs() < 1e-4 * trigamma(x));
        }
    }
}
