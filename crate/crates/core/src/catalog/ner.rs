use nalgebra::DMatrix;

use super::{CatalogModel, ModelId};
use crate::error::{Error, Result};
use crate::tensor::{check_full_rank_gram, DerivativeBundle, RectDomain, Tensor3};

/// Per-area design summaries.
#[derive(Debug, Clone)]
struct AreaDesign {
    n: f64,
    /// `x' (I - P) x`, the within-area scatter.
    within: DMatrix<f64>,
    /// `n xbar xbar'`.
    between: DMatrix<f64>,
}

/// Nested error regression `y_ij = x_ij' beta + v_i + e_ij` with
/// `v_i ~ N(0, tau^2)`, `e_ij ~ N(0, sigma^2)`, so that
/// `V_i = tau^2 1 1' + sigma^2 I`.
///
/// Parameters are `(beta_1..beta_p, tau^2, sigma^2)`. All tensors are
/// finite-`m` averages over areas; `H = I`.
#[derive(Debug, Clone)]
pub struct NerModel {
    x: Vec<DMatrix<f64>>,
    areas: Vec<AreaDesign>,
    p: usize,
    as_balanced: bool,
    domain: RectDomain,
}

/// The averages `g_1..g_4` and `g` at one `(tau^2, sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NerG {
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
    pub g4: f64,
    pub g: f64,
}

impl NerG {
    /// Averages over areas with the given sizes.
    pub fn from_sizes(sizes: &[usize], tau2: f64, sigma2: f64) -> Self {
        let m = sizes.len() as f64;
        let (mut g1, mut g2, mut g3, mut g4) = (0.0, 0.0, 0.0, 0.0);
        for &n in sizes {
            let n = n as f64;
            let a2 = (sigma2 + n * tau2).powi(2);
            g1 += n * (n - 1.0) / a2;
            g2 += n / a2;
            g3 += n * n / a2;
            g4 += n * n * (n - 1.0) / a2;
        }
        let (g1, g2, g3, g4) = (g1 / m, g2 / m, g3 / m, g4 / m);
        let g = g1 * g2 * sigma2 * sigma2 + 2.0 * g1 * g3 * sigma2 * tau2 + g3 * g4 * tau2 * tau2;
        Self { g1, g2, g3, g4, g }
    }
}

/// `g(tau^2, sigma^2)` for a common area size `n`: `n^2 (n-1) / (sigma^2 + n tau^2)^2`.
pub fn ner_g_balanced(n: usize, tau2: f64, sigma2: f64) -> f64 {
    let n = n as f64;
    n * n * (n - 1.0) / (sigma2 + n * tau2).powi(2)
}

/// `g(tau^2, sigma^2)` for the model's area sizes.
pub fn ner_g(model: &NerModel, tau2: f64, sigma2: f64) -> f64 {
    match model.common_size() {
        Some(n) => ner_g_balanced(n, tau2, sigma2),
        None => NerG::from_sizes(&model.sizes(), tau2, sigma2).g,
    }
}

impl NerModel {
    /// Builds the model from per-area `n_i x p` covariate blocks.
    pub fn new(x: Vec<DMatrix<f64>>) -> Result<Self> {
        let p = x.first().map(|b| b.ncols()).unwrap_or(0);
        if p == 0 {
            return Err(Error::InvalidConfig(
                "need at least one area and one covariate".into(),
            ));
        }
        let mut areas = Vec::with_capacity(x.len());
        let mut total = DMatrix::zeros(p, p);
        for (i, block) in x.iter().enumerate() {
            if block.ncols() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    got: block.ncols(),
                });
            }
            if block.nrows() == 0 {
                return Err(Error::InvalidConfig(format!("area {i} has no units")));
            }
            let n = block.nrows() as f64;
            let sum = block.row_sum().transpose();
            let between = &sum * sum.transpose() / n;
            let within = block.transpose() * block - &between;
            total += &within + &between;
            areas.push(AreaDesign { n, within, between });
        }
        if !check_full_rank_gram(&total) {
            return Err(Error::DegenerateSample(
                "stacked covariates do not have full column rank".into(),
            ));
        }
        Ok(Self {
            x,
            areas,
            p,
            as_balanced: false,
            domain: RectDomain::real_then_positive(p, 2),
        })
    }

    /// Marks the model as the balanced variant, whose catalog prior is the
    /// closed form `sigma^-4 (sigma^2 + n tau^2)^-2`. Fails unless all areas
    /// have the same size.
    pub fn into_balanced(mut self) -> Result<Self> {
        if self.common_size().is_none() {
            return Err(Error::InvalidConfig("area sizes differ".into()));
        }
        self.as_balanced = true;
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.areas.len()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.x.iter().map(|b| b.nrows()).collect()
    }

    pub fn covariates(&self) -> &[DMatrix<f64>] {
        &self.x
    }

    /// `Some(n)` when every area has `n` units.
    pub fn common_size(&self) -> Option<usize> {
        let n = self.x[0].nrows();
        self.x.iter().all(|b| b.nrows() == n).then_some(n)
    }

    pub fn is_balanced(&self) -> bool {
        self.common_size().is_some()
    }

    fn variances(&self, theta: &[f64]) -> (f64, f64) {
        (theta[self.p], theta[self.p + 1])
    }

    /// `avg x' V^-1 V_k V^-1 x` for `k` = tau^2 (0) and sigma^2 (1).
    fn beta_sandwich(&self, tau2: f64, sigma2: f64) -> [DMatrix<f64>; 2] {
        let p = self.p;
        let mut out = [DMatrix::zeros(p, p), DMatrix::zeros(p, p)];
        for a in &self.areas {
            let v = sigma2 + a.n * tau2;
            out[0] += &a.between * (a.n / (v * v));
            out[1] += &a.within / (sigma2 * sigma2) + &a.between / (v * v);
        }
        let m = self.m() as f64;
        out.iter_mut().for_each(|x| *x /= m);
        out
    }

    /// `avg tr(V^-3 V_j V_k V_l)`, indexed by the number of tau^2 slots.
    fn trace3(&self, tau2: f64, sigma2: f64) -> [f64; 4] {
        let mut out = [0.0; 4];
        for a in &self.areas {
            let v3 = (sigma2 + a.n * tau2).powi(3);
            for (c, o) in out.iter_mut().enumerate() {
                *o += a.n.powi(c as i32) / v3;
            }
            out[0] += (a.n - 1.0) / sigma2.powi(3);
        }
        let m = self.m() as f64;
        out.map(|x| x / m)
    }
}

impl DerivativeBundle for NerModel {
    fn name(&self) -> &str {
        if self.as_balanced {
            "ner-balanced"
        } else {
            "ner"
        }
    }

    fn domain(&self) -> &RectDomain {
        &self.domain
    }

    fn h(&self, theta: &[f64]) -> DMatrix<f64> {
        self.info(theta)
    }

    fn info(&self, theta: &[f64]) -> DMatrix<f64> {
        let p = self.p;
        let (tau2, sigma2) = self.variances(theta);
        let m = self.m() as f64;
        let mut out = DMatrix::zeros(p + 2, p + 2);
        let (mut tt, mut ts, mut ss) = (0.0, 0.0, 0.0);
        for a in &self.areas {
            let v = sigma2 + a.n * tau2;
            let mut bb = out.view_mut((0, 0), (p, p));
            bb += &a.within / (sigma2 * m) + &a.between / (v * m);
            tt += a.n * a.n / (v * v);
            ts += a.n / (v * v);
            ss += 1.0 / (v * v) + (a.n - 1.0) / (sigma2 * sigma2);
        }
        out[(p, p)] = 0.5 * tt / m;
        out[(p, p + 1)] = 0.5 * ts / m;
        out[(p + 1, p)] = 0.5 * ts / m;
        out[(p + 1, p + 1)] = 0.5 * ss / m;
        out
    }

    fn j(&self, theta: &[f64]) -> Tensor3 {
        let p = self.p;
        let (tau2, sigma2) = self.variances(theta);
        let sandwich = self.beta_sandwich(tau2, sigma2);
        let trace = self.trace3(tau2, sigma2);
        let mut j = Tensor3::zeros(p + 2);
        for (k, m) in sandwich.iter().enumerate() {
            for r in 0..p {
                for s in 0..p {
                    j[(p + k, r, s)] = -m[(r, s)];
                    j[(r, p + k, s)] = -m[(r, s)];
                }
            }
        }
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    j[(p + a, p + b, p + c)] = -trace[count_tau(a, b, c)];
                }
            }
        }
        j
    }

    fn k(&self, theta: &[f64]) -> Tensor3 {
        let p = self.p;
        let (tau2, sigma2) = self.variances(theta);
        let sandwich = self.beta_sandwich(tau2, sigma2);
        let trace = self.trace3(tau2, sigma2);
        let mut k = Tensor3::zeros(p + 2);
        for (c, m) in sandwich.iter().enumerate() {
            for r in 0..p {
                for s in 0..p {
                    let v = m[(r, s)];
                    k[(r, s, p + c)] = v;
                    k[(r, p + c, s)] = v;
                    k[(p + c, r, s)] = v;
                }
            }
        }
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    k[(p + a, p + b, p + c)] = 2.0 * trace[count_tau(a, b, c)];
                }
            }
        }
        k
    }

    fn satisfies_information_identity(&self) -> bool {
        true
    }
}

/// Number of tau^2 slots among variance-block indices (0 = tau^2, 1 = sigma^2).
fn count_tau(a: usize, b: usize, c: usize) -> usize {
    [a, b, c].iter().filter(|&&i| i == 0).count()
}

impl CatalogModel for NerModel {
    fn id(&self) -> ModelId {
        if self.as_balanced {
            ModelId::NerBalanced
        } else {
            ModelId::Ner
        }
    }

    fn log_prior(&self, theta: &[f64]) -> Result<f64> {
        self.domain.require_dim(theta.len())?;
        self.domain.require_interior(theta)?;
        let (tau2, sigma2) = self.variances(theta);
        if self.as_balanced {
            let n = self.areas[0].n;
            Ok(-2.0 * sigma2.ln() - 2.0 * (sigma2 + n * tau2).ln())
        } else {
            Ok(-2.0 * sigma2.ln() + ner_g(self, tau2, sigma2).ln())
        }
    }
}
