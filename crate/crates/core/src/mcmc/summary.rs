use super::Chain;

/// Per-parameter posterior summaries of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSummary {
    pub mean: Vec<f64>,
    /// Equal-tailed 95% interval from the 2.5% and 97.5% type-7 quantiles.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub ess: Vec<f64>,
}

impl ChainSummary {
    pub fn covers(&self, param: usize, value: f64) -> bool {
        self.lower[param] <= value && value <= self.upper[param]
    }
}

/// Type-7 quantile (linear interpolation between order statistics) of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Effective sample size from Geyer's initial monotone sequence estimator.
///
/// A chain with zero variance reports `N`.
pub fn effective_sample_size(x: &[f64]) -> f64 {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let acov = |lag: usize| -> f64 {
        centered[..n - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64
    };
    let gamma0 = acov(0);
    if !(gamma0 > 0.0) {
        return n as f64;
    }
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut k = 0;
    while 2 * k + 1 < n {
        let pair = acov(2 * k) + acov(2 * k + 1);
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev);
        sum += pair;
        prev = pair;
        k += 1;
    }
    let tau = (-1.0 + 2.0 * sum / gamma0).max(f64::MIN_POSITIVE);
    n as f64 / tau
}

pub fn summarize(chain: &Chain) -> ChainSummary {
    let d = chain.dim();
    let mut out = ChainSummary {
        mean: Vec::with_capacity(d),
        lower: Vec::with_capacity(d),
        upper: Vec::with_capacity(d),
        ess: Vec::with_capacity(d),
    };
    for j in 0..d {
        let col = chain.draws.column(j);
        let xs = col.as_slice();
        out.mean.push(xs.iter().sum::<f64>() / xs.len() as f64);
        let mut sorted = xs.to_vec();
        sorted.sort_by(f64::total_cmp);
        out.lower.push(quantile_sorted(&sorted, 0.025));
        out.upper.push(quantile_sorted(&sorted, 0.975));
        out.ess.push(effective_sample_size(xs));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type7_quantiles() {
        let s = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&s, 0.0), 1.0);
        assert_eq!(quantile_sorted(&s, 1.0), 5.0);
        assert!((quantile_sorted(&s, 0.025) - 1.1).abs() < 1e-12);
        assert!((quantile_sorted(&s, 0.975) - 4.9).abs() < 1e-12);
    }

    #[test]
    fn constant_chain() {
        assert_eq!(effective_sample_size(&[2.0; 200]), 200.0);
    }
}
