//! Browser demo: three interactive views over the core library.
//!
//! * [`prior_slice`]: the `phi` field and closed-form log prior along one axis.
//! * [`integrability_map`]: Jacobian asymmetry of `phi` over a 2-D window.
//! * [`ner_posterior`]: one simulated balanced NER dataset, the Gibbs chains
//!   for all three priors and their summaries.
//!
//! The plain functions return flat `Vec<f64>` buffers so they are easy to
//! test natively; the `js_*` wrappers expose them to JavaScript.

use aup_core::catalog::{
    default_model, generate_ner, model_phi, CovariateSpec, ModelId, NerDesign,
};
use aup_core::mcmc::{gibbs_ner, summarize, GibbsConfig, PriorFlavor};
use aup_core::rng;
use wasm_bindgen::prelude::*;

fn model(id: &str) -> Result<Box<dyn aup_core::catalog::CatalogModel>, String> {
    id.parse::<ModelId>()
        .map(default_model)
        .map_err(|e| e.to_string())
}

/// Default anchor of a model, as a starting point for the sliders.
pub fn default_point(id: &str) -> Result<Vec<f64>, String> {
    Ok(model(id)?.default_anchor().coords().to_vec())
}

/// Triples `(x, log prior, phi_axis)` for `count` points on `[lo, hi]`
/// along `axis`, other coordinates taken from `base`. Points outside the
/// domain or without a closed-form prior give `NaN`.
pub fn prior_slice(
    id: &str,
    base: &[f64],
    axis: usize,
    lo: f64,
    hi: f64,
    count: usize,
) -> Result<Vec<f64>, String> {
    let m = model(id)?;
    if base.len() != m.dim() || axis >= m.dim() {
        return Err(format!("{id} has {} parameters", m.dim()));
    }
    let phi = model_phi(m.as_ref());
    let mut out = Vec::with_capacity(3 * count);
    let mut theta = base.to_vec();
    for k in 0..count {
        let x = lo + (hi - lo) * k as f64 / (count.max(2) - 1) as f64;
        theta[axis] = x;
        out.push(x);
        out.push(m.log_prior(&theta).unwrap_or(f64::NAN));
        out.push(phi.eval(&theta).map_or(f64::NAN, |v| v[axis]));
    }
    Ok(out)
}

/// Row-major `res x res` grid of `|d phi_a / d theta_b - d phi_b / d theta_a|`
/// over `[x0, x1] x [y0, y1]` on axes `(a, b)`.
#[allow(clippy::too_many_arguments)]
pub fn integrability_map(
    id: &str,
    base: &[f64],
    a: usize,
    b: usize,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    res: usize,
) -> Result<Vec<f64>, String> {
    let m = model(id)?;
    if base.len() != m.dim() || a >= m.dim() || b >= m.dim() || a == b {
        return Err(format!(
            "need two distinct axes of {id}'s {} parameters",
            m.dim()
        ));
    }
    let phi = model_phi(m.as_ref());
    let step = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * (i as f64 + 0.5) / res as f64;
    let mut out = Vec::with_capacity(res * res);
    let mut theta = base.to_vec();
    for iy in 0..res {
        for ix in 0..res {
            theta[a] = step(x0, x1, ix);
            theta[b] = step(y0, y1, iy);
            let v = phi
                .jacobian(&theta, &Default::default())
                .map_or(f64::NAN, |j| (j[(a, b)] - j[(b, a)]).abs());
            out.push(v);
        }
    }
    Ok(out)
}

/// Simulates one balanced dataset `(beta = (1, 1), tau^2, sigma^2)` and runs
/// the AU, Jeffreys and DG samplers on it.
///
/// Layout: for each prior in that order, 6 summary values
/// `(mean, lower, upper)` for `tau^2` then `sigma^2`, followed by `draws`
/// values of `tau^2` and `draws` of `sigma^2`.
pub fn ner_posterior(
    m: usize,
    n: usize,
    tau2: f64,
    sigma2: f64,
    seed: u64,
    draws: usize,
) -> Result<Vec<f64>, String> {
    let design = NerDesign::balanced(m, n, CovariateSpec::simulation_default());
    let data = generate_ner(
        &design,
        &[1.0, 1.0, tau2, sigma2],
        &mut rng::stream(seed, &[0]),
    )
    .map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for (k, prior) in PriorFlavor::ALL.into_iter().enumerate() {
        let warmup = prior.default_length().1.min(draws);
        let cfg = GibbsConfig::new(prior, seed).with_length(draws, warmup);
        let chain = gibbs_ner(&data, &cfg, &mut rng::stream(seed, &[1 + k as u64]))
            .map_err(|e| format!("{prior}: {e}"))?;
        let s = summarize(&chain);
        for j in [2, 3] {
            out.extend([s.mean[j], s.lower[j], s.upper[j]]);
        }
        out.extend_from_slice(chain.param(2));
        out.extend_from_slice(chain.param(3));
    }
    Ok(out)
}

#[wasm_bindgen(js_name = defaultPoint)]
pub fn js_default_point(id: &str) -> Result<Vec<f64>, JsValue> {
    default_point(id).map_err(JsValue::from)
}

#[wasm_bindgen(js_name = priorSlice)]
pub fn js_prior_slice(
    id: &str,
    base: &[f64],
    axis: usize,
    lo: f64,
    hi: f64,
    count: usize,
) -> Result<Vec<f64>, JsValue> {
    prior_slice(id, base, axis, lo, hi, count).map_err(JsValue::from)
}

#[wasm_bindgen(js_name = integrabilityMap)]
#[allow(clippy::too_many_arguments)]
pub fn js_integrability_map(
    id: &str,
    base: &[f64],
    a: usize,
    b: usize,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    res: usize,
) -> Result<Vec<f64>, JsValue> {
    integrability_map(id, base, a, b, x0, x1, y0, y1, res).map_err(JsValue::from)
}

#[wasm_bindgen(js_name = nerPosterior)]
pub fn js_ner_posterior(
    m: usize,
    n: usize,
    tau2: f64,
    sigma2: f64,
    seed: u64,
    draws: usize,
) -> Result<Vec<f64>, JsValue> {
    ner_posterior(m, n, tau2, sigma2, seed, draws).map_err(JsValue::from)
}
