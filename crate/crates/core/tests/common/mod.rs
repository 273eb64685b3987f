#![allow(dead_code)]

use aup_core::catalog::{default_model, CatalogModel, ModelId, NerArea, NerDataset, NerModel};
use aup_core::mcmc::{DgHyper, PriorFlavor};
use aup_core::tensor::{ParamPoint, RectDomain};
use nalgebra::{dvector, DMatrix, DVector};
use statrs::function::gamma::{digamma, ln_gamma};

/// Expected log-likelihood per observation `E_{theta0} l(theta)`, written
/// out by hand for each i.i.d. model.
pub fn expected_loglik(id: ModelId, theta0: &[f64], theta: &[f64]) -> f64 {
    use std::f64::consts::PI;
    match id {
        ModelId::Binomial => theta0[0] * theta[0].ln() + (1.0 - theta0[0]) * (1.0 - theta[0]).ln(),
        ModelId::NormalMeanVar => {
            let (m0, v0, m, v) = (theta0[0], theta0[1], theta[0], theta[1]);
            -0.5 * (2.0 * PI * v).ln() - (v0 + (m0 - m).powi(2)) / (2.0 * v)
        }
        ModelId::NormalLocScale => {
            let (m0, s0, m, s) = (theta0[0], theta0[1], theta[0], theta[1]);
            -0.5 * (2.0 * PI).ln() - s.ln() - (s0 * s0 + (m0 - m).powi(2)) / (2.0 * s * s)
        }
        ModelId::Gamma => {
            let (a0, s0, a, s) = (theta0[0], theta0[1], theta[0], theta[1]);
            let e_log = digamma(a0) + s0.ln();
            -ln_gamma(a) - a * s.ln() + (a - 1.0) * e_log - a0 * s0 / s
        }
        _ => panic!("not an i.i.d. model"),
    }
}

/// `E_{theta0} l(theta) / m` for the NER model with explicit `V_i` matrices.
pub fn ner_expected_loglik(x: &[DMatrix<f64>], theta0: &[f64], theta: &[f64]) -> f64 {
    let p = x[0].ncols();
    let cov = |t: &[f64], n: usize| {
        DMatrix::from_element(n, n, t[p]) + DMatrix::identity(n, n) * t[p + 1]
    };
    let b0 = DVector::from_column_slice(&theta0[..p]);
    let b = DVector::from_column_slice(&theta[..p]);
    let mut total = 0.0;
    for xi in x {
        let n = xi.nrows();
        let v = cov(theta, n);
        let v0 = cov(theta0, n);
        let chol = v.clone().cholesky().unwrap();
        let logdet = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let vinv = chol.inverse();
        let d = xi * (&b0 - &b);
        total +=
            -0.5 * logdet - 0.5 * (&vinv * &v0).trace() - 0.5 * (d.transpose() * &vinv * &d)[0];
    }
    total / x.len() as f64
}

/// `E_{theta0} l(theta) / n` for linear regression with the given design.
pub fn linreg_expected_loglik(x: &DMatrix<f64>, sd: bool, theta0: &[f64], theta: &[f64]) -> f64 {
    let p = x.ncols();
    let n = x.nrows() as f64;
    let var = |t: &[f64]| if sd { t[p] * t[p] } else { t[p] };
    let d =
        x * (DVector::from_column_slice(&theta0[..p]) - DVector::from_column_slice(&theta[..p]));
    let (v0, v) = (var(theta0), var(theta));
    (-0.5 * n * v.ln() - (n * v0 + d.norm_squared()) / (2.0 * v)) / n
}

/// A small unbalanced NER design with fixed covariates.
pub fn small_ner(sizes: &[usize]) -> NerModel {
    let blocks = sizes
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            DMatrix::from_fn(n, 2, |j, k| {
                let t = (i * 7 + j * 3 + k) as f64;
                if k == 0 {
                    1.0 + 0.3 * t.sin()
                } else {
                    2.0 + (0.7 * t).cos()
                }
            })
        })
        .collect();
    NerModel::new(blocks).unwrap()
}

/// Models with a closed-form prior.
pub fn prior_models() -> Vec<Box<dyn CatalogModel>> {
    ModelId::ALL
        .into_iter()
        .filter(|&id| id != ModelId::Gamma)
        .map(default_model)
        .collect()
}

pub fn iid_models() -> Vec<Box<dyn CatalogModel>> {
    [
        ModelId::Binomial,
        ModelId::NormalMeanVar,
        ModelId::NormalLocScale,
        ModelId::Gamma,
    ]
    .into_iter()
    .map(default_model)
    .collect()
}

/// Ten deterministic interior points spread over a model's domain.
pub fn sample_points(domain: &RectDomain, count: usize) -> Vec<ParamPoint> {
    use aup_core::tensor::Bound;
    (0..count)
        .map(|k| {
            domain
                .lower()
                .iter()
                .zip(domain.upper())
                .enumerate()
                .map(|(t, (lo, hi))| {
                    let u = ((k * 7 + t * 3) % count) as f64 / count as f64;
                    match (lo, hi) {
                        (Bound::Finite(a), Bound::Finite(b)) => a + (b - a) * (0.1 + 0.8 * u),
                        (Bound::Finite(a), _) => a + 0.5 + 2.5 * u,
                        _ => -1.5 + 3.0 * u,
                    }
                })
                .collect::<Vec<_>>()
                .into()
        })
        .collect()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

/// Midpoint rule on `(0, 1)` after `x = t^2`, which smooths `x^-1/2` endpoints.
pub fn integrate01(f: impl Fn(f64) -> f64, nodes: usize) -> f64 {
    let h = 1.0 / nodes as f64;
    (0..nodes)
        .map(|i| {
            let t = (i as f64 + 0.5) * h;
            f(t * t) * 2.0 * t
        })
        .sum::<f64>()
        * h
}

/// Fixed balanced data with `m = 3`, `n = 2`, `p = 1`.
pub fn tiny_data() -> NerDataset {
    let rows = [
        ([0.3, 1.7], [1.1, 2.9]),
        ([-0.5, 0.8], [-0.2, 1.9]),
        ([1.2, 2.5], [2.7, 2.8]),
    ];
    NerDataset::new(
        rows.iter()
            .map(|(x, y)| NerArea {
                y: dvector![y[0], y[1]],
                x: DMatrix::from_column_slice(2, 1, x),
            })
            .collect(),
    )
    .unwrap()
}

/// Posterior means of `(beta, tau^2, sigma^2)` for the tiny data by
/// quadrature over `rho`, after integrating `beta` and `sigma^2` in closed form.
pub fn quadrature_oracle(data: &NerDataset, prior: PriorFlavor, h: DgHyper) -> [f64; 3] {
    let (m, n, p) = (3.0, 2.0, 1.0);
    // Within and between scatter of (y, x), written out for scalar x.
    let (mut w, mut b) = ([0.0; 3], [0.0; 3]); // yy, xy, xx
    for a in &data.areas {
        let (ybar, xbar) = (a.y.mean(), a.x.mean());
        for j in 0..2 {
            let (dy, dx) = (a.y[j] - ybar, a.x[(j, 0)] - xbar);
            w[0] += dy * dy;
            w[1] += dx * dy;
            w[2] += dx * dx;
        }
        b[0] += n * ybar * ybar;
        b[1] += n * xbar * ybar;
        b[2] += n * xbar * xbar;
    }
    let parts = |rho: f64| {
        let a = w[2] + rho * b[2];
        let mxy = w[1] + rho * b[1];
        let myy = w[0] + rho * b[0];
        (a, mxy / a, myy - mxy * mxy / a)
    };
    // log weight of rho, sigma^2 integrated; E[sigma^2 | rho]; tau^2 / sigma^2.
    let terms = |rho: f64| -> (f64, f64, f64, f64) {
        let (a, bhat, qmin) = parts(rho);
        let u = (1.0 - rho) / (n * rho);
        let (lw, alpha, q) = match prior {
            PriorFlavor::Au | PriorFlavor::Jeffreys => {
                let k = if prior == PriorFlavor::Au { 2.0 } else { 1.0 };
                let alpha = n * m / 2.0 - p / 2.0 + 2.0 * k - 2.0;
                (
                    (m / 2.0 + k - 2.0) * rho.ln() - 0.5 * a.ln(),
                    alpha,
                    qmin / 2.0,
                )
            }
            PriorFlavor::Dg => {
                let alpha = n * m / 2.0 - p / 2.0 + h.a_tau + h.a_sigma;
                let q = qmin / 2.0 + h.b_sigma + h.b_tau / u;
                let lw = (m / 2.0 - 2.0) * rho.ln() - (h.a_tau + 1.0) * u.ln() - 0.5 * a.ln();
                (lw, alpha, q)
            }
        };
        let lw = lw + ln_gamma(alpha) - alpha * q.ln();
        (lw, bhat, q / (alpha - 1.0), u)
    };
    let shift = terms(0.5).0;
    let wgt = |rho: f64| (terms(rho).0 - shift).exp();
    let nodes = 400_000;
    let z = integrate01(wgt, nodes);
    let e_beta = integrate01(|r| wgt(r) * terms(r).1, nodes) / z;
    let e_sigma = integrate01(|r| wgt(r) * terms(r).2, nodes) / z;
    let e_tau = integrate01(
        |r| {
            let t = terms(r);
            wgt(r) * t.2 * t.3
        },
        nodes,
    ) / z;
    [e_beta, e_tau, e_sigma]
}
