//! Split of the i.i.d. `phi` into Firth's bias-correction term and a
//! moment-matching term.

use super::{checked_inverse, phi_iid};
use crate::error::{Error, Result};
use crate::tensor::{DerivativeBundle, TensorTolerance};

fn contract(
    bundle: &dyn DerivativeBundle,
    theta: &[f64],
    weight_j: f64,
    weight_k: f64,
) -> Result<Vec<f64>> {
    if !bundle.is_iid() {
        return Err(Error::NotIid(bundle.name().to_string()));
    }
    bundle.domain().require_interior(theta)?;
    let p = bundle.dim();
    let i_inv = checked_inverse(&bundle.info(theta), "I")?;
    let j = bundle.j(theta);
    let k = bundle.k(theta);
    Ok((0..p)
        .map(|t| {
            let mut acc = 0.0;
            for r in 0..p {
                for s in 0..p {
                    acc += i_inv[(r, s)] * (weight_j * j[(t, r, s)] + weight_k * k[(t, r, s)]);
                }
            }
            -acc
        })
        .collect())
}

/// `-sum_rs I^{rs} (J_tr,s + K_trs / 2)`.
pub fn firth_term(bundle: &dyn DerivativeBundle, theta: &[f64]) -> Result<Vec<f64>> {
    contract(bundle, theta, 1.0, 0.5)
}

/// `-1/2 sum_rs I^{rs} K_trs`.
pub fn moment_matching_term(bundle: &dyn DerivativeBundle, theta: &[f64]) -> Result<Vec<f64>> {
    contract(bundle, theta, 0.0, 0.5)
}

/// `max_t |firth_t + moment_t - phi_iid_t|`, where `phi_iid` differentiates
/// `I` numerically and so is independent of the `J` and `K` evaluators.
pub fn firth_decomposition_check(
    bundle: &dyn DerivativeBundle,
    theta: &[f64],
    tol: &TensorTolerance,
) -> Result<f64> {
    let firth = firth_term(bundle, theta)?;
    let moment = moment_matching_term(bundle, theta)?;
    let phi = phi_iid(bundle, theta, tol)?;
    Ok(firth
        .iter()
        .zip(&moment)
        .zip(&phi)
        .map(|((f, m), p)| (f + m - p).abs())
        .fold(0.0, f64::max))
}
