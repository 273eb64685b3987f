use nalgebra::DMatrix;
use rand::{Rng, RngCore};

use super::{CatalogModel, ModelId, Sample};
use crate::error::{Error, Result};
use crate::tensor::{DerivativeBundle, ParamPoint, RectDomain, Tensor3};

/// Bernoulli trials with success probability `theta`.
#[derive(Debug, Clone)]
pub struct BinomialModel {
    domain: RectDomain,
}

impl BinomialModel {
    pub fn new() -> Self {
        Self {
            domain: RectDomain::unit_interval(),
        }
    }
}

impl Default for BinomialModel {
    fn default() -> Self {
        Self::new()
    }
}

impl DerivativeBundle for BinomialModel {
    fn name(&self) -> &str {
        "binomial"
    }

    fn domain(&self) -> &RectDomain {
        &self.domain
    }

    fn h(&self, theta: &[f64]) -> DMatrix<f64> {
        self.info(theta)
    }

    fn info(&self, theta: &[f64]) -> DMatrix<f64> {
        let t = theta[0];
        DMatrix::from_element(1, 1, 1.0 / (t * (1.0 - t)))
    }

    fn j(&self, theta: &[f64]) -> Tensor3 {
        let t = theta[0];
        Tensor3::from_fn(1, |_, _, _| -1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t)))
    }

    fn k(&self, theta: &[f64]) -> Tensor3 {
        let t = theta[0];
        Tensor3::from_fn(1, |_, _, _| 2.0 / (t * t) - 2.0 / ((1.0 - t) * (1.0 - t)))
    }

    fn is_iid(&self) -> bool {
        true
    }

    fn log_density(&self, x: f64, theta: &[f64]) -> Option<f64> {
        let t = theta[0];
        Some(x * t.ln() + (1.0 - x) * (1.0 - t).ln())
    }
}

impl CatalogModel for BinomialModel {
    fn id(&self) -> ModelId {
        ModelId::Binomial
    }

    fn log_prior(&self, theta: &[f64]) -> Result<f64> {
        self.domain.require_dim(theta.len())?;
        self.domain.require_interior(theta)?;
        Ok(-theta[0].ln() - (1.0 - theta[0]).ln())
    }

    /// The sample proportion. At 0 or 1 the posterior is improper; the
    /// value returned there is the limit of the interior formula.
    fn closed_posterior_mean(&self, data: &Sample) -> Result<ParamPoint> {
        let xs = data.univariate()?;
        if xs.is_empty() {
            return Err(Error::DegenerateSample("no observations".into()));
        }
        if xs.iter().any(|&x| x != 0.0 && x != 1.0) {
            return Err(Error::InvalidConfig(
                "binomial outcomes must be 0 or 1".into(),
            ));
        }
        Ok(ParamPoint::new([xs.iter().sum::<f64>() / xs.len() as f64]))
    }

    fn generate(&self, theta: &[f64], size: usize, rng: &mut dyn RngCore) -> Result<Sample> {
        self.domain.require_interior(theta)?;
        Ok(Sample::Univariate(
            (0..size)
                .map(|_| {
                    if rng.random::<f64>() < theta[0] {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect(),
        ))
    }
}
