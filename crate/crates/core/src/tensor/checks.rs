use nalgebra::DMatrix;

use super::{fd_jacobian_extrapolated, DerivativeBundle, TensorTolerance};
use crate::error::{Error, Result};

/// Condition-number ceiling above which a curvature matrix counts as singular.
pub const DEFAULT_MAX_CONDITION: f64 = 1e12;

/// Symmetric (within `1e-9` relative to the largest entry) and Cholesky-factorizable.
pub fn check_spd(m: &DMatrix<f64>) -> bool {
    if !m.is_square() || m.nrows() == 0 || m.iter().any(|x| !x.is_finite()) {
        return false;
    }
    let scale = m.iter().fold(1.0_f64, |a, x| a.max(x.abs()));
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-9 * scale {
                return false;
            }
        }
    }
    m.clone().cholesky().is_some()
}

/// [`check_spd`] plus a condition number below [`DEFAULT_MAX_CONDITION`];
/// used as a numerical full-rank test for Gram matrices.
pub fn check_full_rank_gram(m: &DMatrix<f64>) -> bool {
    check_spd(m) && condition_number(m) < DEFAULT_MAX_CONDITION
}

/// Ratio of extreme eigenvalues of a symmetric matrix (infinite when singular).
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    let ev = sym.symmetric_eigenvalues();
    let (lo, hi) = ev.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), &x| {
        (lo.min(x.abs()), hi.max(x.abs()))
    });
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Inverse of an SPD matrix, refusing non-SPD or ill-conditioned input.
pub fn invert_spd(m: &DMatrix<f64>, max_condition: f64) -> Result<DMatrix<f64>> {
    if !check_spd(m) {
        return Err(Error::SingularCurvature("not positive definite".into()));
    }
    let cond = condition_number(m);
    if cond > max_condition {
        return Err(Error::SingularCurvature(format!(
            "condition number {cond:.3e} exceeds {max_condition:.1e}"
        )));
    }
    let inv = m.clone().cholesky().expect("checked").inverse();
    Ok((&inv + inv.transpose()) * 0.5)
}

/// Result of checking `dI_rs/dt + J_rs,t + K_rst = 0` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub max_violation: f64,
    pub worst: (usize, usize, usize),
    /// Largest `|K|` entry, used to scale the relative tolerance.
    pub scale: f64,
    pub passed: bool,
}

/// Checks the information identity with `dI` from Richardson-extrapolated
/// central differences of `I`.
///
/// A violation is reported, never raised; only domain problems are errors.
pub fn verify_information_identity(
    bundle: &dyn DerivativeBundle,
    theta: &[f64],
    tol: &TensorTolerance,
) -> Result<IdentityReport> {
    if !bundle.satisfies_information_identity() {
        return Err(Error::NotIid(bundle.name().to_string()));
    }
    let p = bundle.dim();
    bundle.domain().require_dim(theta.len())?;
    // Column t of the Jacobian holds d vec(I) / d theta_t.
    let d_info = fd_jacobian_extrapolated(
        |x| Ok(bundle.info(x).iter().copied().collect()),
        bundle.domain(),
        theta,
        tol,
    )?;
    let j = bundle.j(theta);
    let k = bundle.k(theta);
    let mut max_violation = 0.0;
    let mut worst = (0, 0, 0);
    for r in 0..p {
        for s in 0..p {
            for t in 0..p {
                // nalgebra stores column-major: vec index of (r, s) is r + s * p.
                let v = (d_info[(r + s * p, t)] + j[(r, s, t)] + k[(r, s, t)]).abs();
                if v > max_violation {
                    max_violation = v;
                    worst = (r, s, t);
                }
            }
        }
    }
    let scale = k.max_abs().max(j.max_abs());
    Ok(IdentityReport {
        max_violation,
        worst,
        scale,
        passed: max_violation <= tol.rel * (1.0 + scale) + tol.abs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_spd() {
        assert!(check_spd(&DMatrix::identity(2, 2)));
    }

    #[test]
    fn indefinite_is_not_spd() {
        assert!(!check_spd(&DMatrix::from_diagonal(&nalgebra::dvector![
            1.0, -1.0
        ])));
    }

    #[test]
    fn asymmetric_is_not_spd() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.0, 2.0]);
        assert!(!check_spd(&m));
    }

    #[test]
    fn ill_conditioned_inverse_is_refused() {
        let m = DMatrix::from_diagonal(&nalgebra::dvector![1.0, 1e-14]);
        assert!(check_spd(&m));
        assert!(matches!(
            invert_spd(&m, DEFAULT_MAX_CONDITION),
            Err(Error::SingularCurvature(_))
        ));
        let inv = invert_spd(&DMatrix::from_diagonal(&nalgebra::dvector![2.0, 4.0]), 1e12).unwrap();
        assert!((inv[(1, 1)] - 0.25).abs() < 1e-15);
    }
}
