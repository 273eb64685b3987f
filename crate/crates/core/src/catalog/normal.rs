use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::RngCore;
use rand_distr::{Distribution, Normal};

use super::{CatalogModel, ModelId, Sample};
use crate::error::{Error, Result};
use crate::special::ln_gamma;
use crate::tensor::{DerivativeBundle, ParamPoint, RectDomain, Tensor3};

/// `(mean, sum of squared deviations)`, requiring `n >= 2` and spread.
fn centered(xs: &[f64]) -> Result<(f64, f64)> {
    if xs.len() < 2 {
        return Err(Error::DegenerateSample(format!(
            "need at least 2 observations, got {}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
    if !(ss > 0.0) {
        return Err(Error::DegenerateSample("all observations are equal".into()));
    }
    Ok((mean, ss))
}

fn draw_normal(mu: f64, sd: f64, size: usize, rng: &mut dyn RngCore) -> Result<Sample> {
    let dist = Normal::new(mu, sd).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(Sample::Univariate(
        (0..size).map(|_| dist.sample(rng)).collect(),
    ))
}

/// `N(mu, v)` parameterized by `(mu, v)`.
#[derive(Debug, Clone)]
pub struct NormalMeanVarModel {
    domain: RectDomain,
}

impl NormalMeanVarModel {
    pub fn new() -> Self {
        Self {
            domain: RectDomain::real_then_positive(1, 1),
        }
    }
}

impl Default for NormalMeanVarModel {
    fn default() -> Self {
        Self::new()
    }
}

impl DerivativeBundle for NormalMeanVarModel {
    fn name(&self) -> &str {
        "normal-meanvar"
    }

    fn domain(&self) -> &RectDomain {
        &self.domain
    }

    fn h(&self, theta: &[f64]) -> DMatrix<f64> {
        self.info(theta)
    }

    fn info(&self, theta: &[f64]) -> DMatrix<f64> {
        let v = theta[1];
        DMatrix::from_diagonal(&nalgebra::dvector![1.0 / v, 0.5 / (v * v)])
    }

    fn j(&self, theta: &[f64]) -> Tensor3 {
        let v = theta[1];
        let mut j = Tensor3::zeros(2);
        j[(0, 1, 0)] = -1.0 / (v * v);
        j[(1, 0, 0)] = -1.0 / (v * v);
        j[(1, 1, 1)] = -1.0 / (v * v * v);
        j
    }

    fn k(&self, theta: &[f64]) -> Tensor3 {
        let v = theta[1];
        let mut k = Tensor3::zeros(2);
        k.set_symmetric(0, 0, 1, 1.0 / (v * v));
        k[(1, 1, 1)] = 2.0 / (v * v * v);
        k
    }

    fn is_iid(&self) -> bool {
        true
    }

    fn log_density(&self, x: f64, theta: &[f64]) -> Option<f64> {
        let (mu, v) = (theta[0], theta[1]);
        Some(-0.5 * (2.0 * PI * v).ln() - (x - mu).powi(2) / (2.0 * v))
    }
}

impl CatalogModel for NormalMeanVarModel {
    fn id(&self) -> ModelId {
        ModelId::NormalMeanVar
    }

    fn log_prior(&self, theta: &[f64]) -> Result<f64> {
        self.domain.require_dim(theta.len())?;
        self.domain.require_interior(theta)?;
        Ok(-2.0 * theta[1].ln())
    }

    /// `(mean, S^2 / (n - 1))` with `S^2` the sum of squared deviations.
    fn closed_posterior_mean(&self, data: &Sample) -> Result<ParamPoint> {
        let xs = data.univariate()?;
        let (mean, ss) = centered(xs)?;
        Ok(ParamPoint::new([mean, ss / (xs.len() as f64 - 1.0)]))
    }

    fn generate(&self, theta: &[f64], size: usize, rng: &mut dyn RngCore) -> Result<Sample> {
        self.domain.require_interior(theta)?;
        draw_normal(theta[0], theta[1].sqrt(), size, rng)
    }
}

/// `N(mu, sigma^2)` parameterized by `(mu, sigma)`.
#[derive(Debug, Clone)]
pub struct NormalLocScaleModel {
    domain: RectDomain,
}

impl NormalLocScaleModel {
    pub fn new() -> Self {
        Self {
            domain: RectDomain::real_then_positive(1, 1),
        }
    }
}

impl Default for NormalLocScaleModel {
    fn default() -> Self {
        Self::new()
    }
}

impl DerivativeBundle for NormalLocScaleModel {
    fn name(&self) -> &str {
        "normal-locscale"
    }

    fn domain(&self) -> &RectDomain {
        &self.domain
    }

    fn h(&self, theta: &[f64]) -> DMatrix<f64> {
        self.info(theta)
    }

    fn info(&self, theta: &[f64]) -> DMatrix<f64> {
        let s2 = theta[1] * theta[1];
        DMatrix::from_diagonal(&nalgebra::dvector![1.0 / s2, 2.0 / s2])
    }

    fn j(&self, theta: &[f64]) -> Tensor3 {
        let s3 = theta[1].powi(3);
        let mut j = Tensor3::zeros(2);
        j[(0, 1, 0)] = -2.0 / s3;
        j[(1, 0, 0)] = -2.0 / s3;
        j[(1, 1, 1)] = -6.0 / s3;
        j
    }

    fn k(&self, theta: &[f64]) -> Tensor3 {
        let s3 = theta[1].powi(3);
        let mut k = Tensor3::zeros(2);
        k.set_symmetric(0, 0, 1, 2.0 / s3);
        k[(1, 1, 1)] = 10.0 / s3;
        k
    }

    fn is_iid(&self) -> bool {
        true
    }

    fn log_density(&self, x: f64, theta: &[f64]) -> Option<f64> {
        let (mu, s) = (theta[0], theta[1]);
        Some(-0.5 * (2.0 * PI).ln() - s.ln() - (x - mu).powi(2) / (2.0 * s * s))
    }
}

impl CatalogModel for NormalLocScaleModel {
    fn id(&self) -> ModelId {
        ModelId::NormalLocScale
    }

    fn log_prior(&self, theta: &[f64]) -> Result<f64> {
        self.domain.require_dim(theta.len())?;
        self.domain.require_interior(theta)?;
        Ok(-2.0 * theta[1].ln())
    }

    /// `(mean, Gamma((n-1)/2) / (sqrt 2 Gamma(n/2)) S)` with `S^2` the sum of
    /// squared deviations.
    fn closed_posterior_mean(&self, data: &Sample) -> Result<ParamPoint> {
        let xs = data.univariate()?;
        let (mean, ss) = centered(xs)?;
        let n = xs.len() as f64;
        let c = (ln_gamma(0.5 * (n - 1.0)) - ln_gamma(0.5 * n)).exp() / 2f64.sqrt();
        Ok(ParamPoint::new([mean, c * ss.sqrt()]))
    }

    fn generate(&self, theta: &[f64], size: usize, rng: &mut dyn RngCore) -> Result<Sample> {
        self.domain.require_interior(theta)?;
        draw_normal(theta[0], theta[1], size, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn locscale_mean_at_n2() {
        let m = NormalLocScaleModel::new();
        // deviations +-1/sqrt2 give S = 1
        let h = 0.5f64.sqrt();
        let est = m
            .closed_posterior_mean(&Sample::Univariate(vec![3.0 + h, 3.0 - h]))
            .unwrap();
        assert!((est[0] - 3.0).abs() < 1e-12);
        assert!((est[1] - (PI / 2.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn constant_sample_is_degenerate() {
        let m = NormalMeanVarModel::new();
        assert!(matches!(
            m.closed_posterior_mean(&Sample::Univariate(vec![2.0; 4])),
            Err(Error::DegenerateSample(_))
        ));
    }
}
