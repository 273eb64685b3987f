//! The `phi` field, its integrability, and prior construction.
//!
//! A prior `pi` yields a second-order unbiased posterior mean when
//! `d log pi / d theta = phi(theta)` with
//!
//! ```text
//! phi_v = -1/2 sum_rs H^{rs} A_rsv,
//! A_rsv = K_vrs + 2 J_vr,s + sum_tu H^{tu} I_su K_rtv.
//! ```
//!
//! Such a prior exists iff the Jacobian of `phi` is symmetric; when it is,
//! [`construct_log_prior`] recovers `log pi` by integrating `phi` along
//! axis-parallel segments from an anchor point.

mod construct;
mod firth;
mod integrability;
mod quadrature;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tensor::{
    fd_jacobian, invert_spd, DerivativeBundle, RectDomain, TensorTolerance, DEFAULT_MAX_CONDITION,
};

pub use construct::{construct_log_prior, LogPrior};
pub use firth::{firth_decomposition_check, firth_term, moment_matching_term};
pub use integrability::{diagonal_integrability_check, integrability_check, IntegrabilityReport};
pub use quadrature::adaptive_simpson;

type FieldFn<'a> = dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync + 'a;

/// A vector field `Theta -> R^p` with a numeric Jacobian.
pub struct PhiField<'a> {
    domain: RectDomain,
    eval: Box<FieldFn<'a>>,
}

impl<'a> PhiField<'a> {
    pub fn from_fn<F>(domain: RectDomain, f: F) -> Self
    where
        F: Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync + 'a,
    {
        Self {
            domain,
            eval: Box::new(f),
        }
    }

    /// Field from [`phi_general`].
    pub fn general(bundle: &'a dyn DerivativeBundle) -> Self {
        Self::from_fn(bundle.domain().clone(), move |x| phi_general(bundle, x))
    }

    /// Field from [`phi_hi`].
    pub fn hi(bundle: &'a dyn DerivativeBundle, tol: TensorTolerance) -> Self {
        Self::from_fn(bundle.domain().clone(), move |x| phi_hi(bundle, x, &tol))
    }

    /// Field from [`phi_iid`].
    pub fn iid(bundle: &'a dyn DerivativeBundle, tol: TensorTolerance) -> Self {
        Self::from_fn(bundle.domain().clone(), move |x| phi_iid(bundle, x, &tol))
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &RectDomain {
        &self.domain
    }

    pub fn eval(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.domain.require_interior(theta)?;
        (self.eval)(theta)
    }

    /// Entry `(t, u)` is `d phi_t / d theta_u`.
    pub fn jacobian(&self, theta: &[f64], tol: &TensorTolerance) -> Result<DMatrix<f64>> {
        fd_jacobian(|x| (self.eval)(x), &self.domain, theta, tol)
    }
}

fn checked_inverse(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    invert_spd(m, DEFAULT_MAX_CONDITION).map_err(|e| match e {
        Error::SingularCurvature(msg) => Error::SingularCurvature(format!("{what}: {msg}")),
        other => other,
    })
}

/// `phi` from the full `A` tensor; `H` is inverted once.
pub fn phi_general(bundle: &dyn DerivativeBundle, theta: &[f64]) -> Result<Vec<f64>> {
    let domain = bundle.domain();
    domain.require_interior(theta)?;
    let p = bundle.dim();
    let h_inv = checked_inverse(&bundle.h(theta), "H")?;
    let info = bundle.info(theta);
    let j = bundle.j(theta);
    let k = bundle.k(theta);
    // m[(t, s)] = sum_u H^{tu} I_us
    let m = &h_inv * &info;
    let mut phi = vec![0.0; p];
    for (v, out) in phi.iter_mut().enumerate() {
        let mut acc = 0.0;
        for r in 0..p {
            for s in 0..p {
                let hrs = h_inv[(r, s)];
                if hrs == 0.0 {
                    continue;
                }
                let mut a = k[(v, r, s)] + 2.0 * j[(v, r, s)];
                for t in 0..p {
                    a += m[(t, s)] * k[(r, t, v)];
                }
                acc += hrs * a;
            }
        }
        *out = -0.5 * acc;
    }
    Ok(phi)
}

/// `phi_t = -sum_rs H^{rs} (K_trs + J_tr,s)`, valid when `H = I`.
pub fn phi_hi(
    bundle: &dyn DerivativeBundle,
    theta: &[f64],
    tol: &TensorTolerance,
) -> Result<Vec<f64>> {
    bundle.domain().require_interior(theta)?;
    let h = bundle.h(theta);
    let info = bundle.info(theta);
    let deviation = (&h - &info).amax();
    if deviation > tol.rel * (1.0 + h.amax()) + tol.abs {
        return Err(Error::HNotEqualI { deviation });
    }
    let p = bundle.dim();
    let h_inv = checked_inverse(&h, "H")?;
    let j = bundle.j(theta);
    let k = bundle.k(theta);
    Ok((0..p)
        .map(|t| {
            let mut acc = 0.0;
            for r in 0..p {
                for s in 0..p {
                    acc += h_inv[(r, s)] * (k[(t, r, s)] + j[(t, r, s)]);
                }
            }
            -acc
        })
        .collect())
}

/// `phi_t = sum_rs I^{rs} dI_tr/d theta_s` with `dI` by central differences.
pub fn phi_iid(
    bundle: &dyn DerivativeBundle,
    theta: &[f64],
    tol: &TensorTolerance,
) -> Result<Vec<f64>> {
    if !bundle.is_iid() {
        return Err(Error::NotIid(bundle.name().to_string()));
    }
    bundle.domain().require_interior(theta)?;
    let p = bundle.dim();
    let i_inv = checked_inverse(&bundle.info(theta), "I")?;
    let d_info = fd_jacobian(
        |x| Ok(bundle.info(x).iter().copied().collect()),
        bundle.domain(),
        theta,
        tol,
    )?;
    Ok((0..p)
        .map(|t| {
            let mut acc = 0.0;
            for r in 0..p {
                for s in 0..p {
                    // column-major vec index of (t, r)
                    acc += i_inv[(r, s)] * d_info[(t + r * p, s)];
                }
            }
            acc
        })
        .collect())
}
