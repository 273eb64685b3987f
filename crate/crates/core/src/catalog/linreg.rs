use nalgebra::{DMatrix, DVector};
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use super::{CatalogModel, ModelId, Sample};
use crate::error::{Error, Result};
use crate::special::ln_gamma;
use crate::tensor::{check_full_rank_gram, DerivativeBundle, ParamPoint, RectDomain, Tensor3};

/// Which scale parameter follows the coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinRegParam {
    /// `(beta, sigma^2)`
    Variance,
    /// `(beta, sigma)`
    StdDev,
}

/// `y ~ N(X beta, sigma^2 I_n)` with a fixed design.
///
/// `H` is non-random here, so the tensors are the exact finite-`n`
/// quantities scaled by `1/n`, written with `S = X'X / n`.
#[derive(Debug, Clone)]
pub struct LinRegModel {
    x: DMatrix<f64>,
    s: DMatrix<f64>,
    param: LinRegParam,
    domain: RectDomain,
}

impl LinRegModel {
    pub fn new(x: DMatrix<f64>, param: LinRegParam) -> Result<Self> {
        let (n, p) = x.shape();
        if p == 0 || n <= p {
            return Err(Error::DegenerateSample(format!(
                "design is {n} x {p}; need n > p >= 1"
            )));
        }
        let s = x.transpose() * &x / n as f64;
        if !check_full_rank_gram(&s) {
            return Err(Error::DegenerateSample(
                "design does not have full column rank".into(),
            ));
        }
        Ok(Self {
            x,
            s,
            param,
            domain: RectDomain::real_then_positive(p, 1),
        })
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn param(&self) -> LinRegParam {
        self.param
    }

    /// Number of regression coefficients.
    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Ordinary least squares and residual sum of squares.
    pub fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
        let (n, p) = x.shape();
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: y.len(),
            });
        }
        if n <= p {
            return Err(Error::DegenerateSample(format!(
                "n = {n} does not exceed p = {p}"
            )));
        }
        let xtx = x.transpose() * x;
        if !check_full_rank_gram(&xtx) {
            return Err(Error::DegenerateSample("design is rank deficient".into()));
        }
        let chol = xtx.cholesky().expect("checked positive definite");
        let beta = chol.solve(&(x.transpose() * y));
        let resid = y - x * &beta;
        let rss = resid.norm_squared();
        let scale = y.norm_squared().max(f64::MIN_POSITIVE);
        if !(rss > 1e-24 * scale) {
            return Err(Error::DegenerateSample(
                "zero residual sum of squares".into(),
            ));
        }
        Ok((beta, rss))
    }
}

impl DerivativeBundle for LinRegModel {
    fn name(&self) -> &str {
        match self.param {
            LinRegParam::Variance => "linreg-var",
            LinRegParam::StdDev => "linreg-sd",
        }
    }

    fn domain(&self) -> &RectDomain {
        &self.domain
    }

    fn h(&self, theta: &[f64]) -> DMatrix<f64> {
        self.info(theta)
    }

    fn info(&self, theta: &[f64]) -> DMatrix<f64> {
        let p = self.p();
        let w = theta[p];
        let mut i = DMatrix::zeros(p + 1, p + 1);
        match self.param {
            LinRegParam::Variance => {
                i.view_mut((0, 0), (p, p)).copy_from(&(&self.s / w));
                i[(p, p)] = 0.5 / (w * w);
            }
            LinRegParam::StdDev => {
                i.view_mut((0, 0), (p, p)).copy_from(&(&self.s / (w * w)));
                i[(p, p)] = 2.0 / (w * w);
            }
        }
        i
    }

    fn j(&self, theta: &[f64]) -> Tensor3 {
        let p = self.p();
        let w = theta[p];
        let (c_beta, c_scale) = match self.param {
            LinRegParam::Variance => (-1.0 / (w * w), -1.0 / (w * w * w)),
            LinRegParam::StdDev => (-2.0 / (w * w * w), -6.0 / (w * w * w)),
        };
        let mut j = Tensor3::zeros(p + 1);
        for r in 0..p {
            for s in 0..p {
                j[(p, r, s)] = c_beta * self.s[(r, s)];
                j[(r, p, s)] = c_beta * self.s[(r, s)];
            }
        }
        j[(p, p, p)] = c_scale;
        j
    }

    fn k(&self, theta: &[f64]) -> Tensor3 {
        let p = self.p();
        let w = theta[p];
        let (c_beta, c_scale) = match self.param {
            LinRegParam::Variance => (1.0 / (w * w), 2.0 / (w * w * w)),
            LinRegParam::StdDev => (2.0 / (w * w * w), 10.0 / (w * w * w)),
        };
        let mut k = Tensor3::zeros(p + 1);
        for r in 0..p {
            for s in 0..p {
                let v = c_beta * self.s[(r, s)];
                k[(r, s, p)] = v;
                k[(r, p, s)] = v;
                k[(p, r, s)] = v;
            }
        }
        k[(p, p, p)] = c_scale;
        k
    }

    fn satisfies_information_identity(&self) -> bool {
        true
    }
}

impl CatalogModel for LinRegModel {
    fn id(&self) -> ModelId {
        match self.param {
            LinRegParam::Variance => ModelId::LinRegVar,
            LinRegParam::StdDev => ModelId::LinRegSd,
        }
    }

    fn log_prior(&self, theta: &[f64]) -> Result<f64> {
        self.domain.require_dim(theta.len())?;
        self.domain.require_interior(theta)?;
        Ok(-2.0 * theta[self.p()].ln())
    }

    /// Variance form: `(beta_ols, RSS / (n - p))`. Standard-deviation form:
    /// `(beta_ols, Gamma((n-p)/2) / (sqrt 2 Gamma((n-p+1)/2)) sqrt(RSS))`.
    fn closed_posterior_mean(&self, data: &Sample) -> Result<ParamPoint> {
        let Sample::Regression { x, y } = data else {
            return Err(Error::InvalidConfig("expected regression data".into()));
        };
        let (beta, rss) = Self::ols(x, y)?;
        let k = (x.nrows() - x.ncols()) as f64;
        let scale = match self.param {
            LinRegParam::Variance => rss / k,
            LinRegParam::StdDev => {
                (ln_gamma(0.5 * k) - ln_gamma(0.5 * (k + 1.0))).exp() / 2f64.sqrt() * rss.sqrt()
            }
        };
        let mut out: Vec<f64> = beta.iter().copied().collect();
        out.push(scale);
        Ok(out.into())
    }

    /// Responses on the model's own design; `size` must equal its row count.
    fn generate(&self, theta: &[f64], size: usize, rng: &mut dyn RngCore) -> Result<Sample> {
        self.domain.require_dim(theta.len())?;
        self.domain.require_interior(theta)?;
        if size != self.x.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.x.nrows(),
                got: size,
            });
        }
        let p = self.p();
        let sd = match self.param {
            LinRegParam::Variance => theta[p].sqrt(),
            LinRegParam::StdDev => theta[p],
        };
        let beta = DVector::from_column_slice(&theta[..p]);
        let mean = &self.x * beta;
        let y = DVector::from_fn(size, |i, _| {
            let z: f64 = StandardNormal.sample(rng);
            mean[i] + sd * z
        });
        Ok(Sample::Regression {
            x: self.x.clone(),
            y,
        })
    }
}
