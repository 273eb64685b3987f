use std::sync::Arc;

use super::quadrature::adaptive_simpson;
use super::PhiField;
use crate::error::{Error, Result};
use crate::tensor::{ParamPoint, TensorTolerance};

type LogDensityFn<'a> = dyn Fn(&[f64]) -> Result<f64> + Send + Sync + 'a;

/// Unnormalized log prior density. The additive constant is unspecified.
#[derive(Clone)]
pub struct LogPrior<'a> {
    anchor: Option<ParamPoint>,
    eval: Arc<LogDensityFn<'a>>,
    reverse: Option<Arc<LogDensityFn<'a>>>,
}

impl<'a> LogPrior<'a> {
    /// A closed-form log prior.
    pub fn closed_form<F>(f: F) -> Self
    where
        F: Fn(&[f64]) -> Result<f64> + Send + Sync + 'a,
    {
        Self {
            anchor: None,
            eval: Arc::new(f),
            reverse: None,
        }
    }

    /// The anchor `c` of a constructed prior; `None` for closed forms.
    pub fn anchor(&self) -> Option<&ParamPoint> {
        self.anchor.as_ref()
    }

    pub fn eval(&self, theta: &[f64]) -> Result<f64> {
        (self.eval)(theta)
    }

    /// Difference between integrating along the last axis first (the
    /// construction path) and along the first axis first. Zero up to
    /// quadrature error for an integrable field.
    pub fn path_discrepancy(&self, theta: &[f64]) -> Result<f64> {
        match &self.reverse {
            Some(rev) => Ok(((self.eval)(theta)? - rev(theta)?).abs()),
            None => Ok(0.0),
        }
    }

    /// Like [`LogPrior::eval`], but fails with `NonIntegrable` when the two
    /// axis orderings disagree by more than `tol`.
    pub fn eval_checked(&self, theta: &[f64], tol: f64) -> Result<f64> {
        let v = self.eval(theta)?;
        if let Some(rev) = &self.reverse {
            let gap = (v - rev(theta)?).abs();
            if gap > tol {
                return Err(Error::NonIntegrable(format!(
                    "axis orderings disagree by {gap:.3e} at {theta:?}"
                )));
            }
        }
        Ok(v)
    }
}

impl std::fmt::Debug for LogPrior<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LogPrior")
            .field("anchor", &self.anchor)
            .finish_non_exhaustive()
    }
}

/// Integrates `phi` along axis-parallel segments from `anchor`:
///
/// `log pi(theta) = sum_t int_{c_t}^{theta_t} phi_t(c_1..c_{t-1}, z, theta_{t+1}..theta_p) dz`.
///
/// Each axis segment is integrated by adaptive Simpson with absolute error
/// `quad_tol / p`. The Jacobian at the anchor is probed for symmetry; a
/// clearly asymmetric field is refused with `NonIntegrable`.
pub fn construct_log_prior<'a>(
    phi: &'a PhiField<'a>,
    anchor: &ParamPoint,
    quad_tol: f64,
) -> Result<LogPrior<'a>> {
    let domain = phi.domain();
    domain.require_dim(anchor.dim())?;
    domain.require_interior(anchor)?;
    if !(quad_tol > 0.0) {
        return Err(Error::InvalidConfig(
            "quadrature tolerance must be positive".into(),
        ));
    }
    let tol = TensorTolerance::default();
    if let Ok(jac) = phi.jacobian(anchor, &tol) {
        let scale = jac.amax();
        let asym = (&jac - jac.transpose()).amax();
        if asym > 1e-4 * (1.0 + scale) {
            return Err(Error::NonIntegrable(format!(
                "Jacobian asymmetry {asym:.3e} at the anchor {:?}",
                anchor.coords()
            )));
        }
    }

    let p = anchor.dim();
    let axis_tol = quad_tol / p as f64;

    let c = anchor.clone();
    let forward = move |theta: &[f64]| -> Result<f64> {
        domain.require_dim(theta.len())?;
        domain.require_interior(theta)?;
        let mut total = 0.0;
        for t in 0..p {
            let mut x: Vec<f64> = c.coords()[..t].to_vec();
            x.extend_from_slice(&theta[t..]);
            total += adaptive_simpson(
                |z| {
                    let mut y = x.clone();
                    y[t] = z;
                    Ok(phi.eval(&y)?[t])
                },
                c[t],
                theta[t],
                axis_tol,
            )?;
        }
        Ok(total)
    };

    let c = anchor.clone();
    let reverse = move |theta: &[f64]| -> Result<f64> {
        domain.require_dim(theta.len())?;
        domain.require_interior(theta)?;
        let mut total = 0.0;
        for t in 0..p {
            let mut x: Vec<f64> = theta[..t].to_vec();
            x.extend_from_slice(&c.coords()[t..]);
            total += adaptive_simpson(
                |z| {
                    let mut y = x.clone();
                    y[t] = z;
                    Ok(phi.eval(&y)?[t])
                },
                c[t],
                theta[t],
                axis_tol,
            )?;
        }
        Ok(total)
    };

    Ok(LogPrior {
        anchor: Some(anchor.clone()),
        eval: Arc::new(forward),
        reverse: Some(Arc::new(reverse)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::RectDomain;

    fn meanvar_phi() -> PhiField<'static> {
        PhiField::from_fn(RectDomain::real_then_positive(1, 1), |x| {
            Ok(vec![0.0, -2.0 / x[1]])
        })
    }

    #[test]
    fn meanvar_prior_is_minus_two_log_variance() {
        let phi = meanvar_phi();
        let prior = construct_log_prior(&phi, &ParamPoint::new([0.0, 1.0]), 1e-8).unwrap();
        let v = prior.eval(&[0.7, 4.0]).unwrap();
        assert!((v + 2.0 * 4f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn anchor_evaluates_to_zero() {
        let phi = meanvar_phi();
        let prior = construct_log_prior(&phi, &ParamPoint::new([0.3, 2.0]), 1e-8).unwrap();
        assert_eq!(prior.eval(&[0.3, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn rotational_field_is_refused() {
        let phi = PhiField::from_fn(RectDomain::real_then_positive(2, 0), |x| {
            Ok(vec![-x[1], x[0]])
        });
        let err = construct_log_prior(&phi, &ParamPoint::new([0.5, 0.5]), 1e-8).unwrap_err();
        assert!(matches!(err, Error::NonIntegrable(_)));
    }

    #[test]
    fn path_dependence_is_detected_after_the_fact() {
        // Symmetric Jacobian at the anchor (origin) only.
        let phi = PhiField::from_fn(RectDomain::real_then_positive(2, 0), |x| {
            Ok(vec![0.0, x[0] * x[0]])
        });
        let prior = construct_log_prior(&phi, &ParamPoint::new([0.0, 0.0]), 1e-10).unwrap();
        assert!(prior.path_discrepancy(&[1.0, 1.0]).unwrap() > 0.5);
        assert!(matches!(
            prior.eval_checked(&[1.0, 1.0], 1e-6),
            Err(Error::NonIntegrable(_))
        ));
    }
}
