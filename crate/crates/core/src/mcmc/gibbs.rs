use nalgebra::{DMatrix, DVector};
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use super::variates::{sample_inverse_gamma, sample_truncated_gamma01};
use super::{Chain, GibbsConfig, PriorFlavor};
use crate::catalog::{check_propriety_conditions, NerDataset};
use crate::error::{Error, Result};

/// Sufficient statistics of balanced NER data in `z = (y, x)` coordinates.
///
/// With `w = (1, -beta)`, `sum_i |y_i - x_i beta|^2 = w' T w` and
/// `sum_i n ebar_i^2 = w' B w`.
#[derive(Debug, Clone)]
pub struct BalancedStats {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    /// `sum_i z_i' z_i`.
    pub total: DMatrix<f64>,
    /// `sum_i n zbar_i zbar_i'`.
    pub between: DMatrix<f64>,
    /// `total - between`.
    pub within: DMatrix<f64>,
    /// Per-area column sums `iota' z_i`, one row per area.
    pub sums: DMatrix<f64>,
}

impl BalancedStats {
    pub fn new(data: &NerDataset) -> Result<Self> {
        let n = data
            .common_size()
            .ok_or_else(|| Error::InvalidConfig("Gibbs samplers need balanced data".into()))?;
        let (m, p) = (data.m(), data.p());
        let d = p + 1;
        let mut total = DMatrix::zeros(d, d);
        let mut between = DMatrix::zeros(d, d);
        let mut sums = DMatrix::zeros(m, d);
        for (i, area) in data.areas.iter().enumerate() {
            let z = area.z();
            let s = z.row_sum();
            total += z.transpose() * &z;
            between += s.transpose() * &s / n as f64;
            sums.row_mut(i).copy_from(&s);
        }
        let within = &total - &between;
        Ok(Self {
            m,
            n,
            p,
            total,
            between,
            within,
            sums,
        })
    }

    /// Within-area OLS `beta` and the matching residual variance.
    fn initial_state(&self) -> Result<(DVector<f64>, f64)> {
        let p = self.p;
        let wxx = self.within.view((1, 1), (p, p)).into_owned();
        let wxy = self.within.view((1, 0), (p, 1)).into_owned();
        let beta = wxx
            .cholesky()
            .ok_or_else(|| {
                Error::ProprietyViolation("within-area covariate scatter is singular".into())
            })?
            .solve(&wxy)
            .column(0)
            .into_owned();
        let dof = (self.m * (self.n - 1)).saturating_sub(p).max(1);
        let s2 = quad(&self.within, &beta) / dof as f64;
        Ok((beta, if s2 > 0.0 { s2 } else { 1.0 }))
    }
}

/// `w' A w` with `w = (1, -beta)`.
fn quad(a: &DMatrix<f64>, beta: &DVector<f64>) -> f64 {
    let w = weight(beta);
    (w.transpose() * a * &w)[0]
}

fn weight(beta: &DVector<f64>) -> DVector<f64> {
    let mut w = DVector::zeros(beta.len() + 1);
    w[0] = 1.0;
    w.rows_mut(1, beta.len()).copy_from(&(-beta));
    w
}

/// `mean + sd * L^-T xi` for precision-like `prec = L L'`.
fn draw_gaussian(
    prec: &DMatrix<f64>,
    rhs: &DVector<f64>,
    sd: f64,
    rng: &mut dyn RngCore,
) -> Option<DVector<f64>> {
    let chol = prec.clone().cholesky()?;
    let mean = chol.solve(rhs);
    let xi = DVector::from_fn(rhs.len(), |_, _| StandardNormal.sample(rng));
    let noise = chol.l().transpose().solve_upper_triangular(&xi)?;
    Some(mean + noise * sd)
}

fn non_finite(iteration: usize, parameter: &str, state: &[f64]) -> Error {
    Error::NonFiniteDraw {
        iteration,
        parameter: parameter.into(),
        state: state.to_vec(),
    }
}

/// Gibbs sampler for the balanced NER posterior under the chosen prior.
///
/// AU and Jeffreys run the blocked sampler over `(beta, rho, sigma^2)` with
/// `rho = sigma^2 / (sigma^2 + n tau^2)`; DG runs the latent-effect sampler
/// over `(v, beta, tau^2, sigma^2)`. Draws are returned as
/// `(beta, tau^2, sigma^2)`.
pub fn gibbs_ner(data: &NerDataset, cfg: &GibbsConfig, rng: &mut dyn RngCore) -> Result<Chain> {
    cfg.validate()?;
    if cfg.prior != PriorFlavor::Dg {
        let report = check_propriety_conditions(data);
        if !report.verdict() {
            return Err(Error::ProprietyViolation(format!(
                "conditions {} fail",
                report.failures().join(", ")
            )));
        }
    }
    let stats = BalancedStats::new(data)?;
    match cfg.prior {
        PriorFlavor::Au | PriorFlavor::Jeffreys => blocked(&stats, cfg, rng),
        PriorFlavor::Dg => latent(&stats, cfg, rng),
    }
}

fn blocked(st: &BalancedStats, cfg: &GibbsConfig, rng: &mut dyn RngCore) -> Result<Chain> {
    let (m, n, p) = (st.m as f64, st.n as f64, st.p);
    // Exponent k of {sigma^2 (sigma^2 + n tau^2)}^-k.
    let k = if cfg.prior == PriorFlavor::Au {
        2.0
    } else {
        1.0
    };
    let rho_shape = m / 2.0 + k - 1.0;
    let sigma_shape = n * m / 2.0 + 2.0 * k - 2.0;

    let (mut beta, mut sigma2) = st.initial_state()?;
    let mut rho = 0.5;
    let mut draws = DMatrix::zeros(cfg.draws, p + 2);
    let mut state = vec![0.0; p + 2];
    let record = |state: &mut [f64], beta: &DVector<f64>, rho: f64, sigma2: f64| {
        state[..p].copy_from_slice(beta.as_slice());
        state[p] = sigma2 * (1.0 - rho) / (n * rho);
        state[p + 1] = sigma2;
    };

    for it in 0..cfg.warmup + cfg.draws {
        let mix = &st.within + &st.between * rho;
        let prec = mix.view((1, 1), (p, p)).into_owned();
        let rhs = mix.view((1, 0), (p, 1)).column(0).into_owned();
        beta = draw_gaussian(&prec, &rhs, sigma2.sqrt(), rng)
            .filter(|b| b.iter().all(|x| x.is_finite()))
            .ok_or_else(|| {
                record(&mut state, &beta, rho, sigma2);
                non_finite(it, "beta", &state)
            })?;

        let qb = quad(&st.between, &beta);
        let qw = quad(&st.within, &beta);
        rho = sample_truncated_gamma01(rho_shape, qb / (2.0 * sigma2), rng)?;
        sigma2 = sample_inverse_gamma(sigma_shape, 0.5 * (qw + rho * qb), rng);

        record(&mut state, &beta, rho, sigma2);
        if !(state.iter().all(|x| x.is_finite()) && state[p] > 0.0 && sigma2 > 0.0) {
            return Err(non_finite(it, "tau2/sigma2", &state));
        }
        if it >= cfg.warmup {
            draws.row_mut(it - cfg.warmup).copy_from_slice(&state);
        }
    }
    Ok(Chain::new(draws, cfg.warmup, cfg.seed))
}

fn latent(st: &BalancedStats, cfg: &GibbsConfig, rng: &mut dyn RngCore) -> Result<Chain> {
    let (m, n, p) = (st.m, st.n as f64, st.p);
    let h = cfg.dg;
    let txx = st.total.view((1, 1), (p, p)).into_owned();
    let txy = st.total.view((1, 0), (p, 1)).column(0).into_owned();
    // Area sums of x, one column per area.
    let xsum = st.sums.columns(1, p).transpose();

    let (mut beta, mut sigma2) = st.initial_state()?;
    let mut tau2 = sigma2 / n;
    let mut v = DVector::zeros(m);
    let mut draws = DMatrix::zeros(cfg.draws, p + 2);
    let mut state = vec![0.0; p + 2];

    for it in 0..cfg.warmup + cfg.draws {
        // Area residual sums n * ebar_i.
        let esum = st.sums.column(0) - st.sums.columns(1, p) * &beta;
        let s2 = 1.0 / (n / sigma2 + 1.0 / tau2);
        for i in 0..m {
            let z: f64 = StandardNormal.sample(rng);
            v[i] = s2 * esum[i] / sigma2 + s2.sqrt() * z;
        }

        let rhs = &txy - &xsum * &v;
        beta = match draw_gaussian(&txx, &rhs, sigma2.sqrt(), rng) {
            Some(b) if b.iter().all(|x| x.is_finite()) => b,
            _ => return Err(non_finite(it, "beta", &state)),
        };

        let vv = v.norm_squared();
        tau2 = sample_inverse_gamma(h.a_tau + m as f64 / 2.0, h.b_tau + vv / 2.0, rng);

        let esum = st.sums.column(0) - st.sums.columns(1, p) * &beta;
        let sse = (quad(&st.total, &beta) - 2.0 * v.dot(&esum) + n * vv).max(0.0);
        sigma2 = sample_inverse_gamma(h.a_sigma + n * m as f64 / 2.0, h.b_sigma + sse / 2.0, rng);

        state[..p].copy_from_slice(beta.as_slice());
        state[p] = tau2;
        state[p + 1] = sigma2;
        if !(state.iter().all(|x| x.is_finite()) && tau2 > 0.0 && sigma2 > 0.0) {
            return Err(non_finite(it, "tau2/sigma2", &state));
        }
        if it >= cfg.warmup {
            draws.row_mut(it - cfg.warmup).copy_from_slice(&state);
        }
    }
    Ok(Chain::new(draws, cfg.warmup, cfg.seed))
}
