//! Central finite differences.
//!
//! Mixed higher derivatives use tensor products of the one-dimensional
//! central operator `(f(x+h) - f(x-h)) / 2h`; the operators commute, so a
//! repeated axis simply reuses the same shift.

use nalgebra::DMatrix;

use super::{RectDomain, Tensor3, TensorTolerance};
use crate::error::Result;

/// Step used on every axis: `fd_step * (1 + |theta_t|)`.
pub fn step_for(theta: &[f64], tol: &TensorTolerance) -> Vec<f64> {
    theta
        .iter()
        .map(|x| tol.fd_step * (1.0 + x.abs()))
        .collect()
}

fn shifted(theta: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut x = theta.to_vec();
    for &(axis, delta) in moves {
        x[axis] += delta;
    }
    x
}

/// Central-difference gradient of a scalar field.
///
/// The point must keep a margin of two steps from the boundary on every axis.
pub fn fd_gradient<F>(
    f: F,
    domain: &RectDomain,
    theta: &[f64],
    tol: &TensorTolerance,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    let h = step_for(theta, tol);
    domain.require_margin(theta, &h.iter().map(|x| 2.0 * x).collect::<Vec<_>>())?;
    Ok((0..theta.len())
        .map(|t| {
            let up = f(&shifted(theta, &[(t, h[t])]));
            let down = f(&shifted(theta, &[(t, -h[t])]));
            (up - down) / (2.0 * h[t])
        })
        .collect())
}

/// Jacobian of a vector field: entry `(i, t)` is `d f_i / d theta_t`.
pub fn fd_jacobian<F>(
    f: F,
    domain: &RectDomain,
    theta: &[f64],
    tol: &TensorTolerance,
) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let h = step_for(theta, tol);
    domain.require_margin(theta, &h.iter().map(|x| 2.0 * x).collect::<Vec<_>>())?;
    let p = theta.len();
    let mut jac: Option<DMatrix<f64>> = None;
    for t in 0..p {
        let up = f(&shifted(theta, &[(t, h[t])]))?;
        let down = f(&shifted(theta, &[(t, -h[t])]))?;
        let jac = jac.get_or_insert_with(|| DMatrix::zeros(up.len(), p));
        for i in 0..up.len() {
            jac[(i, t)] = (up[i] - down[i]) / (2.0 * h[t]);
        }
    }
    Ok(jac.unwrap_or_else(|| DMatrix::zeros(0, 0)))
}

/// [`fd_jacobian`] with one Richardson step over `h` and `h / 2`, which
/// cancels the `h^2` truncation term.
pub fn fd_jacobian_extrapolated<F>(
    f: F,
    domain: &RectDomain,
    theta: &[f64],
    tol: &TensorTolerance,
) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let coarse = fd_jacobian(&f, domain, theta, tol)?;
    let half = TensorTolerance {
        fd_step: tol.fd_step / 2.0,
        ..*tol
    };
    let fine = fd_jacobian(&f, domain, theta, &half)?;
    Ok((fine * 4.0 - coarse) / 3.0)
}

/// Hessian by the product stencil `D_a D_b`.
pub fn fd_hessian<F>(
    f: F,
    domain: &RectDomain,
    theta: &[f64],
    tol: &TensorTolerance,
) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    let h = step_for(theta, tol);
    domain.require_margin(theta, &h.iter().map(|x| 3.0 * x).collect::<Vec<_>>())?;
    let p = theta.len();
    let mut out = DMatrix::zeros(p, p);
    for a in 0..p {
        for b in a..p {
            let mut acc = 0.0;
            for (sa, sb) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                acc += sa * sb * f(&shifted(theta, &[(a, sa * h[a]), (b, sb * h[b])]));
            }
            let v = acc / (4.0 * h[a] * h[b]);
            out[(a, b)] = v;
            out[(b, a)] = v;
        }
    }
    Ok(out)
}

/// Third-derivative tensor by the product stencil `D_a D_b D_c`.
pub fn fd_third<F>(
    f: F,
    domain: &RectDomain,
    theta: &[f64],
    tol: &TensorTolerance,
) -> Result<Tensor3>
where
    F: Fn(&[f64]) -> f64,
{
    let h = step_for(theta, tol);
    domain.require_margin(theta, &h.iter().map(|x| 4.0 * x).collect::<Vec<_>>())?;
    let p = theta.len();
    let mut out = Tensor3::zeros(p);
    for a in 0..p {
        for b in a..p {
            for c in b..p {
                let mut acc = 0.0;
                for mask in 0..8u8 {
                    let sa = if mask & 1 == 0 { 1.0 } else { -1.0 };
                    let sb = if mask & 2 == 0 { 1.0 } else { -1.0 };
                    let sc = if mask & 4 == 0 { 1.0 } else { -1.0 };
                    let x = shifted(theta, &[(a, sa * h[a]), (b, sb * h[b]), (c, sc * h[c])]);
                    acc += sa * sb * sc * f(&x);
                }
                out.set_symmetric(a, b, c, acc / (8.0 * h[a] * h[b] * h[c]));
            }
        }
    }
    Ok(out)
}
