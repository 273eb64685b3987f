use nalgebra::{DMatrix, DVector};
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use super::NerModel;
use crate::error::{Error, Result};
use crate::tensor::RectDomain;

/// Multivariate normal law for the covariate rows `x_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateSpec {
    mean: DVector<f64>,
    chol: DMatrix<f64>,
}

impl CovariateSpec {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if cov.shape() != (mean.len(), mean.len()) {
            return Err(Error::DimensionMismatch {
                expected: mean.len(),
                got: cov.nrows(),
            });
        }
        let chol = cov
            .cholesky()
            .ok_or_else(|| {
                Error::InvalidConfig("covariate covariance is not positive definite".into())
            })?
            .l();
        Ok(Self { mean, chol })
    }

    /// `N((1, 2), [[4, 1], [1, 1]])`.
    pub fn simulation_default() -> Self {
        Self::new(
            nalgebra::dvector![1.0, 2.0],
            DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 1.0]),
        )
        .expect("positive definite")
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// An `n x p` block of independent rows.
    pub fn draw_block(&self, n: usize, rng: &mut dyn RngCore) -> DMatrix<f64> {
        let p = self.dim();
        let mut out = DMatrix::zeros(n, p);
        let mut z = DVector::zeros(p);
        for i in 0..n {
            z.iter_mut().for_each(|v| *v = StandardNormal.sample(rng));
            let row = &self.mean + &self.chol * &z;
            out.row_mut(i).copy_from(&row.transpose());
        }
        out
    }
}

/// Area sizes plus the covariate law (or a frozen covariate draw).
#[derive(Debug, Clone)]
pub struct NerDesign {
    sizes: Vec<usize>,
    covariates: CovariateSpec,
    frozen: Option<Vec<DMatrix<f64>>>,
}

impl NerDesign {
    pub fn new(sizes: Vec<usize>, covariates: CovariateSpec) -> Self {
        Self {
            sizes,
            covariates,
            frozen: None,
        }
    }

    /// `m` areas of `n` units each.
    pub fn balanced(m: usize, n: usize, covariates: CovariateSpec) -> Self {
        Self::new(vec![n; m], covariates)
    }

    /// Draws the covariates once; every later dataset reuses them.
    pub fn freeze(mut self, rng: &mut dyn RngCore) -> Self {
        self.frozen = Some(self.draw_covariates(rng));
        self
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen.is_some()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn p(&self) -> usize {
        self.covariates.dim()
    }

    /// A fresh covariate block per area.
    pub fn draw_covariates(&self, rng: &mut dyn RngCore) -> Vec<DMatrix<f64>> {
        self.sizes
            .iter()
            .map(|&n| self.covariates.draw_block(n, rng))
            .collect()
    }
}

/// One area's responses and covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct NerArea {
    pub y: DVector<f64>,
    pub x: DMatrix<f64>,
}

impl NerArea {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// `[y x]`, of size `n x (1 + p)`.
    pub fn z(&self) -> DMatrix<f64> {
        let mut z = DMatrix::zeros(self.n(), 1 + self.x.ncols());
        z.column_mut(0).copy_from(&self.y);
        z.view_mut((0, 1), self.x.shape()).copy_from(&self.x);
        z
    }
}

/// Grouped NER data, optionally tagged with the generating parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct NerDataset {
    pub areas: Vec<NerArea>,
    pub theta_true: Option<Vec<f64>>,
}

impl NerDataset {
    pub fn new(areas: Vec<NerArea>) -> Result<Self> {
        let p = areas.first().map(|a| a.x.ncols()).unwrap_or(0);
        if p == 0 {
            return Err(Error::InvalidConfig(
                "dataset needs at least one area and covariate".into(),
            ));
        }
        for a in &areas {
            if a.x.ncols() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    got: a.x.ncols(),
                });
            }
            if a.x.nrows() != a.y.len() {
                return Err(Error::DimensionMismatch {
                    expected: a.x.nrows(),
                    got: a.y.len(),
                });
            }
        }
        Ok(Self {
            areas,
            theta_true: None,
        })
    }

    pub fn m(&self) -> usize {
        self.areas.len()
    }

    pub fn p(&self) -> usize {
        self.areas[0].x.ncols()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.areas.iter().map(NerArea::n).collect()
    }

    pub fn rows(&self) -> usize {
        self.areas.iter().map(NerArea::n).sum()
    }

    pub fn common_size(&self) -> Option<usize> {
        let n = self.areas[0].n();
        self.areas.iter().all(|a| a.n() == n).then_some(n)
    }

    /// The model built on this dataset's covariates.
    pub fn model(&self) -> Result<NerModel> {
        NerModel::new(self.areas.iter().map(|a| a.x.clone()).collect())
    }
}

/// Draws `v_i ~ N(0, tau^2)`, `e_ij ~ N(0, sigma^2)` and
/// `y_ij = x_ij' beta + v_i + e_ij`, with covariates drawn afresh unless the
/// design is frozen. `theta = (beta, tau^2, sigma^2)`.
pub fn generate_ner(
    design: &NerDesign,
    theta: &[f64],
    rng: &mut dyn RngCore,
) -> Result<NerDataset> {
    let p = design.p();
    let domain = RectDomain::real_then_positive(p, 2);
    domain.require_dim(theta.len())?;
    domain.require_interior(theta)?;
    let beta = DVector::from_column_slice(&theta[..p]);
    let (tau, sigma) = (theta[p].sqrt(), theta[p + 1].sqrt());
    let xs = match &design.frozen {
        Some(x) => x.clone(),
        None => design.draw_covariates(rng),
    };
    let areas = xs
        .into_iter()
        .map(|x| {
            let z: f64 = StandardNormal.sample(rng);
            let v = tau * z;
            let mean = &x * &beta;
            let y = DVector::from_fn(x.nrows(), |j, _| {
                let e: f64 = StandardNormal.sample(rng);
                mean[j] + v + sigma * e
            });
            NerArea { y, x }
        })
        .collect();
    let mut data = NerDataset::new(areas)?;
    data.theta_true = Some(theta.to_vec());
    Ok(data)
}

/// Sufficient data conditions for a proper posterior under the balanced
/// catalog prior. Each field holds the smallest `k` such that the
/// condition holds on areas `0..=k` pooled, or `None` when it fails on the
/// whole dataset.
///
/// * (i) the stacked covariates `X` have full column rank;
/// * (ii) the stacked `[y X]` has full column rank;
/// * (iii) the pooled within-area scatter of `x` is positive definite;
/// * (iv) the pooled within-area scatter of `(y, x)` is positive definite.
///
/// Any single area satisfying a condition is a witness for the pooled one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProprietyReport {
    pub x_full_rank: Option<usize>,
    pub yx_full_rank: Option<usize>,
    pub x_within_pd: Option<usize>,
    pub yx_within_pd: Option<usize>,
}

impl ProprietyReport {
    pub fn conditions(&self) -> [bool; 4] {
        [
            self.x_full_rank.is_some(),
            self.yx_full_rank.is_some(),
            self.x_within_pd.is_some(),
            self.yx_within_pd.is_some(),
        ]
    }

    pub fn verdict(&self) -> bool {
        self.conditions().iter().all(|&c| c)
    }

    /// Labels of the failing conditions, e.g. `["iii", "iv"]`.
    pub fn failures(&self) -> Vec<&'static str> {
        ["i", "ii", "iii", "iv"]
            .into_iter()
            .zip(self.conditions())
            .filter(|(_, ok)| !ok)
            .map(|(l, _)| l)
            .collect()
    }
}

/// Positive definite with smallest eigenvalue above `1e-10` of the largest.
fn is_pd(m: &DMatrix<f64>) -> bool {
    if m.iter().any(|x| !x.is_finite()) {
        return false;
    }
    let ev = m.clone().symmetric_eigenvalues();
    let hi = ev.iter().fold(0.0_f64, |a, &x| a.max(x.abs()));
    let lo = ev.iter().fold(f64::INFINITY, |a, &x| a.min(x));
    hi > 0.0 && lo > 1e-10 * hi
}

fn first_pd(mats: impl Iterator<Item = DMatrix<f64>>) -> Option<usize> {
    let mut acc: Option<DMatrix<f64>> = None;
    for (k, m) in mats.enumerate() {
        let sum = match acc.take() {
            Some(a) => a + m,
            None => m,
        };
        if is_pd(&sum) {
            return Some(k);
        }
        acc = Some(sum);
    }
    None
}

fn within(z: &DMatrix<f64>) -> DMatrix<f64> {
    let n = z.nrows() as f64;
    let s = z.row_sum().transpose();
    z.transpose() * z - &s * s.transpose() / n
}

pub fn check_propriety_conditions(data: &NerDataset) -> ProprietyReport {
    let p = data.p();
    let zs: Vec<DMatrix<f64>> = data.areas.iter().map(NerArea::z).collect();
    let xs = || zs.iter().map(move |z| z.columns(1, p).into_owned());
    ProprietyReport {
        x_full_rank: first_pd(xs().map(|x| x.transpose() * x)),
        yx_full_rank: first_pd(zs.iter().map(|z| z.transpose() * z)),
        x_within_pd: first_pd(xs().map(|x| within(&x))),
        yx_within_pd: first_pd(zs.iter().map(within)),
    }
}
