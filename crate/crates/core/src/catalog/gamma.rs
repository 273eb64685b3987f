use nalgebra::DMatrix;
use rand::RngCore;
use rand_distr::{Distribution, Gamma};

use super::{CatalogModel, ModelId, Sample};
use crate::error::{Error, Result};
use crate::special::{ln_gamma, tetragamma, trigamma};
use crate::tensor::{DerivativeBundle, RectDomain, Tensor3};

/// Gamma distribution with shape `theta_1` and scale `theta_2`.
///
/// Its `phi` field has an asymmetric Jacobian, so no asymptotically
/// unbiased prior free of `n` exists.
#[derive(Debug, Clone)]
pub struct GammaModel {
    domain: RectDomain,
}

impl GammaModel {
    pub fn new() -> Self {
        Self {
            domain: RectDomain::real_then_positive(0, 2),
        }
    }
}

impl Default for GammaModel {
    fn default() -> Self {
        Self::new()
    }
}

impl DerivativeBundle for GammaModel {
    fn name(&self) -> &str {
        "gamma"
    }

    fn domain(&self) -> &RectDomain {
        &self.domain
    }

    fn h(&self, theta: &[f64]) -> DMatrix<f64> {
        self.info(theta)
    }

    fn info(&self, theta: &[f64]) -> DMatrix<f64> {
        let (a, s) = (theta[0], theta[1]);
        DMatrix::from_row_slice(2, 2, &[trigamma(a), 1.0 / s, 1.0 / s, a / (s * s)])
    }

    fn j(&self, theta: &[f64]) -> Tensor3 {
        let (a, s) = (theta[0], theta[1]);
        let mut j = Tensor3::zeros(2);
        j[(1, 1, 0)] = -2.0 / (s * s);
        j[(1, 1, 1)] = -2.0 * a / (s * s * s);
        j
    }

    fn k(&self, theta: &[f64]) -> Tensor3 {
        let (a, s) = (theta[0], theta[1]);
        let mut k = Tensor3::zeros(2);
        k[(0, 0, 0)] = -tetragamma(a);
        k.set_symmetric(0, 1, 1, 1.0 / (s * s));
        k[(1, 1, 1)] = 4.0 * a / (s * s * s);
        k
    }

    fn is_iid(&self) -> bool {
        true
    }

    fn log_density(&self, x: f64, theta: &[f64]) -> Option<f64> {
        let (a, s) = (theta[0], theta[1]);
        Some(-ln_gamma(a) - a * s.ln() + (a - 1.0) * x.ln() - x / s)
    }
}

impl CatalogModel for GammaModel {
    fn id(&self) -> ModelId {
        ModelId::Gamma
    }

    fn log_prior(&self, _theta: &[f64]) -> Result<f64> {
        Err(Error::NonIntegrable(
            "the gamma shape/scale model has no asymptotically unbiased prior".into(),
        ))
    }

    fn generate(&self, theta: &[f64], size: usize, rng: &mut dyn RngCore) -> Result<Sample> {
        self.domain.require_interior(theta)?;
        let dist =
            Gamma::new(theta[0], theta[1]).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Ok(Sample::Univariate(
            (0..size).map(|_| dist.sample(rng)).collect(),
        ))
    }
}
