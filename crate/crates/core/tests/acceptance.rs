//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs every criterion by default; pass criterion numbers to run a subset,
//! e.g. `cargo test -p aup-core --test acceptance -- 1 5`.

mod common;

use std::time::Instant;

use aup_core::catalog::{
    closed_log_prior, closed_posterior_mean, default_model, linreg_grid_design, model_phi,
    LinRegModel, LinRegParam, ModelId,
};
use aup_core::mcmc::{gibbs_ner, summarize, DgHyper, GibbsConfig, PriorFlavor};
use aup_core::prior::{construct_log_prior, firth_decomposition_check, integrability_check};
use aup_core::rng;
use aup_core::sim::{
    emit_csv, figure_config, run_experiment, ExperimentConfig, Figure, MetricsRecord, Scenario,
};
use aup_core::tensor::{fd_gradient, verify_information_identity, ParamPoint, TensorTolerance};
use common::*;

type Outcome = Result<String, String>;
type Criterion = (usize, &'static str, fn() -> Outcome);

const C1_REPS: usize = 100_000;
const C1_MAX_Z: f64 = 4.0;
const C2_PDE_TOL: f64 = 1e-5;
const C2_QUAD_TOL: f64 = 1e-6;
const C3_GAMMA_MIN_ASYMMETRY: f64 = 0.01;
const C4_TOL: f64 = 1e-6;
const C5_CHAIN: usize = 50_000;
const C5_MAX_Z: f64 = 3.0;
const C6_REPS: usize = 2000;
const C6_AU_MAX: f64 = 0.05;
const C6_JEFFREYS_BAND: (f64, f64) = (0.2, 0.45);
const C7_COVERAGE_BAND: (f64, f64) = (0.93, 0.965);
const SEED: u64 = 42;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Closed-form posterior means are unbiased over many replications.
fn criterion1() -> Outcome {
    let cases: Vec<(ModelId, Vec<f64>, usize)> = vec![
        (ModelId::Binomial, vec![0.3], 20),
        (ModelId::NormalMeanVar, vec![1.0, 2.0], 10),
        (ModelId::NormalLocScale, vec![-0.5, 1.5], 5),
        (ModelId::LinRegVar, vec![1.0, -0.5, 2.0], 20),
        (ModelId::LinRegSd, vec![1.0, -0.5, 1.5], 20),
    ];
    let mut worst = 0.0_f64;
    let mut lines = Vec::new();
    for (k, (id, theta, n)) in cases.into_iter().enumerate() {
        let model: Box<dyn aup_core::catalog::CatalogModel> = match id {
            ModelId::LinRegVar => {
                Box::new(LinRegModel::new(linreg_grid_design(n), LinRegParam::Variance).unwrap())
            }
            ModelId::LinRegSd => {
                Box::new(LinRegModel::new(linreg_grid_design(n), LinRegParam::StdDev).unwrap())
            }
            _ => default_model(id),
        };
        let mut r = rng::stream(SEED, &[100, k as u64]);
        let mut est: Vec<Vec<f64>> = vec![Vec::with_capacity(C1_REPS); theta.len()];
        for _ in 0..C1_REPS {
            let data = model
                .generate(&theta, n, &mut r)
                .map_err(|e| e.to_string())?;
            let mean = closed_posterior_mean(id.as_str(), &data)
                .map_err(|e| format!("{}: {e}", id.as_str()))?;
            for (j, v) in mean.coords().iter().enumerate() {
                est[j].push(*v);
            }
        }
        let zs: Vec<f64> = est
            .iter()
            .zip(&theta)
            .map(|(xs, t)| {
                let (m, sd) = mean_sd(xs);
                (m - t) / (sd / (xs.len() as f64).sqrt())
            })
            .collect();
        let z = zs.iter().fold(0.0_f64, |a, z| a.max(z.abs()));
        worst = worst.max(z);
        lines.push(format!("{} max|z| {z:.2}", id.as_str()));
    }
    check(
        worst < C1_MAX_Z,
        format!("{} (limit {C1_MAX_Z})", lines.join(", ")),
    )
}

/// The closed prior solves the PDE and path integration reproduces it.
fn criterion2() -> Outcome {
    let tol = TensorTolerance::default();
    let (mut pde, mut quad) = (0.0_f64, 0.0_f64);
    for m in prior_models() {
        let prior = closed_log_prior(m.as_ref());
        let phi = model_phi(m.as_ref());
        let anchor = m.default_anchor();
        let built = construct_log_prior(&phi, &anchor, C2_QUAD_TOL)
            .map_err(|e| format!("{}: {e}", m.name()))?;
        let offset = prior.eval(&anchor).unwrap();
        for theta in sample_points(m.domain(), 10) {
            let grad = fd_gradient(|x| prior.eval(x).unwrap(), m.domain(), &theta, &tol)
                .map_err(|e| e.to_string())?;
            let f = phi.eval(&theta).map_err(|e| e.to_string())?;
            pde = f
                .iter()
                .zip(&grad)
                .fold(pde, |a, (x, y)| a.max((x - y).abs()));
            let diff = built.eval(&theta).map_err(|e| e.to_string())?
                - (prior.eval(&theta).unwrap() - offset);
            quad = quad.max(diff.abs());
        }
    }
    check(
        pde < C2_PDE_TOL && quad < C2_QUAD_TOL,
        format!("max |grad log prior - phi| {pde:.2e} (limit {C2_PDE_TOL:e}), max construction error {quad:.2e} (limit {C2_QUAD_TOL:e})"),
    )
}

fn product(axes: &[&[f64]]) -> Vec<ParamPoint> {
    let mut out: Vec<Vec<f64>> = vec![vec![]];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|p| axis.iter().map(move |&v| [p.clone(), vec![v]].concat()))
            .collect();
    }
    out.into_iter().map(ParamPoint::from).collect()
}

/// Integrability verdicts: true for every prior model, false for gamma.
fn criterion3() -> Outcome {
    let tol = TensorTolerance::default();
    let scale: &[f64] = &[0.5, 1.0, 2.5];
    let loc: &[f64] = &[-1.0, 0.0, 1.5];
    let grids: Vec<(ModelId, Vec<ParamPoint>)> = vec![
        (ModelId::NormalMeanVar, product(&[loc, scale])),
        (ModelId::NormalLocScale, product(&[loc, scale])),
        (
            ModelId::LinRegVar,
            product(&[&[0.0, 1.0], &[-1.0, 0.5], scale]),
        ),
        (
            ModelId::LinRegSd,
            product(&[&[0.0, 1.0], &[-1.0, 0.5], scale]),
        ),
        (
            ModelId::NerBalanced,
            product(&[&[1.0], &[0.0, 1.0], scale, scale]),
        ),
    ];
    let mut lines = Vec::new();
    let mut ok = true;
    for (id, grid) in grids {
        let m = default_model(id);
        let r =
            integrability_check(&model_phi(m.as_ref()), &grid, &tol).map_err(|e| e.to_string())?;
        ok &= r.verdict && r.points_tested >= 9;
        lines.push(format!(
            "{} {} on {} pts",
            id.as_str(),
            r.verdict,
            r.points_tested
        ));
    }
    let g = default_model(ModelId::Gamma);
    let grid = product(&[&[1.0, 2.0, 4.0], &[0.5, 1.0, 2.0]]);
    let r = integrability_check(&model_phi(g.as_ref()), &grid, &tol).map_err(|e| e.to_string())?;
    let at = r.asymmetry_at(&[2.0, 1.0]).unwrap_or(f64::NAN);
    ok &= !r.verdict && r.points_tested >= 9 && at > C3_GAMMA_MIN_ASYMMETRY;
    lines.push(format!(
        "gamma {} on {} pts, asymmetry at (2,1) {at:.4}",
        r.verdict, r.points_tested
    ));
    check(ok, lines.join(", "))
}

/// Information identity and Firth decomposition on the i.i.d. models.
fn criterion4() -> Outcome {
    let tol = TensorTolerance::default();
    let (mut ident, mut firth) = (0.0_f64, 0.0_f64);
    for m in iid_models() {
        for theta in sample_points(m.domain(), 10) {
            let r =
                verify_information_identity(m.as_ref(), &theta, &tol).map_err(|e| e.to_string())?;
            ident = ident.max(r.max_violation);
            firth = firth.max(
                firth_decomposition_check(m.as_ref(), &theta, &tol).map_err(|e| e.to_string())?,
            );
        }
    }
    check(
        ident < C4_TOL && firth < C4_TOL,
        format!("identity residual {ident:.2e}, firth residual {firth:.2e} (limit {C4_TOL:e})"),
    )
}

/// Chain means of (tau^2, sigma^2) against the quadrature oracle.
fn criterion5() -> Outcome {
    let data = tiny_data();
    let mut ok = true;
    let mut lines = Vec::new();
    for (k, prior) in PriorFlavor::ALL.into_iter().enumerate() {
        let oracle = quadrature_oracle(&data, prior, DgHyper::default());
        let warmup = prior.default_length().1;
        let cfg = GibbsConfig::new(prior, SEED).with_length(C5_CHAIN, warmup);
        let chain = gibbs_ner(&data, &cfg, &mut rng::stream(SEED, &[200, k as u64]))
            .map_err(|e| e.to_string())?;
        let s = summarize(&chain);
        for (col, name) in [(1, "tau2"), (2, "sigma2")] {
            let (_, sd) = mean_sd(chain.param(col));
            let se = sd / s.ess[col].sqrt();
            let z = (s.mean[col] - oracle[col]) / se;
            ok &= z.abs() < C5_MAX_Z;
            lines.push(format!(
                "{prior} {name} {:.4} vs {:.4} (z {z:+.2})",
                s.mean[col], oracle[col]
            ));
        }
    }
    check(ok, format!("{} (limit {C5_MAX_Z} SE)", lines.join(", ")))
}

fn c6_configs() -> [ExperimentConfig; 2] {
    let base = |scenario: Scenario| figure_config(Figure::Bias, scenario, C6_REPS, SEED).unwrap();
    let i = ExperimentConfig {
        priors: vec![PriorFlavor::Au, PriorFlavor::Jeffreys],
        m: vec![10],
        ..base(Scenario::I)
    };
    let ii = ExperimentConfig {
        priors: vec![PriorFlavor::Au, PriorFlavor::Dg],
        m: vec![10, 100],
        ..base(Scenario::Ii)
    };
    [i, ii]
}

fn find(recs: &[MetricsRecord], prior: PriorFlavor, m: usize, parameter: &str) -> f64 {
    recs.iter()
        .find(|r| r.prior == prior && r.m == m && r.parameter == parameter)
        .map_or(f64::NAN, |r| r.abs_bias)
}

/// Runs the criterion-6 configurations with `threads` workers and writes each CSV.
fn c6_run(threads: usize, dir: &std::path::Path) -> Result<Vec<Vec<MetricsRecord>>, String> {
    c6_configs()
        .into_iter()
        .enumerate()
        .map(|(k, mut cfg)| {
            cfg.threads = threads;
            let recs = run_experiment(&cfg).map_err(|e| e.to_string())?;
            emit_csv(&recs, &dir.join(format!("c6-{k}-t{threads}.csv")))
                .map_err(|e| e.to_string())?;
            Ok(recs)
        })
        .collect()
}

/// Bias trends at R = 2000.
fn criterion6(runs: &[Vec<MetricsRecord>]) -> Outcome {
    let (i, ii) = (&runs[0], &runs[1]);
    let au = find(i, PriorFlavor::Au, 10, "tau2");
    let jef = find(i, PriorFlavor::Jeffreys, 10, "tau2");
    let (au10, dg10) = (
        find(ii, PriorFlavor::Au, 10, "tau2"),
        find(ii, PriorFlavor::Dg, 10, "tau2"),
    );
    let (au100, dg100) = (
        find(ii, PriorFlavor::Au, 100, "tau2"),
        find(ii, PriorFlavor::Dg, 100, "tau2"),
    );
    let ok = au < C6_AU_MAX
        && (C6_JEFFREYS_BAND.0..=C6_JEFFREYS_BAND.1).contains(&jef)
        && dg10 > au10
        && dg100 > au100;
    check(
        ok,
        format!(
            "(i) m=10 |bias tau2| AU {au:.4} (< {C6_AU_MAX}), Jeffreys {jef:.4} (in [{}, {}]); (ii) DG vs AU m=10 {dg10:.4} > {au10:.4}, m=100 {dg100:.4} > {au100:.4}",
            C6_JEFFREYS_BAND.0, C6_JEFFREYS_BAND.1
        ),
    )
}

/// Coverage near nominal at m = 1000.
fn criterion7() -> Outcome {
    let cfg = ExperimentConfig {
        priors: vec![PriorFlavor::Au, PriorFlavor::Jeffreys],
        m: vec![1000],
        ..figure_config(Figure::Coverage, Scenario::I, C6_REPS, SEED).unwrap()
    };
    let recs = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let (lo, hi) = C7_COVERAGE_BAND;
    let ok = recs.len() == 8 && recs.iter().all(|r| (lo..=hi).contains(&r.coverage95));
    let cells: Vec<String> = recs
        .iter()
        .map(|r| format!("{} {} {:.4}", r.prior, r.parameter, r.coverage95))
        .collect();
    check(ok, format!("{} (band [{lo}, {hi}])", cells.join(", ")))
}

/// The criterion-6 CSVs are byte-identical across worker counts.
fn criterion8(dir: &std::path::Path, threads: (usize, usize)) -> Outcome {
    c6_run(threads.1, dir)?;
    let mut ok = true;
    for k in 0..2 {
        let a = std::fs::read(dir.join(format!("c6-{k}-t{}.csv", threads.0)))
            .map_err(|e| e.to_string())?;
        let b = std::fs::read(dir.join(format!("c6-{k}-t{}.csv", threads.1)))
            .map_err(|e| e.to_string())?;
        ok &= a == b;
    }
    check(
        ok,
        format!(
            "{} vs {} workers, {} CSV files compared",
            threads.0, threads.1, 2
        ),
    )
}

fn report(n: usize, name: &str, start: Instant, outcome: &Outcome) -> bool {
    let secs = start.elapsed().as_secs_f64();
    let (tag, detail) = match outcome {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    println!("{tag} criterion {n} ({name}, {secs:.1} s): {detail}");
    outcome.is_ok()
}

fn main() {
    let selected: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let want = |n: usize| selected.is_empty() || selected.contains(&n);
    let simple: [Criterion; 5] = [
        (1, "closed-form exactness", criterion1),
        (2, "PDE consistency", criterion2),
        (3, "existence verdicts", criterion3),
        (4, "identity suite", criterion4),
        (5, "Gibbs oracle", criterion5),
    ];
    let mut all = true;
    for (n, name, f) in simple {
        if want(n) {
            let t = Instant::now();
            all &= report(n, name, t, &f());
        }
    }
    if want(6) || want(8) {
        let dir = tempfile::tempdir().expect("temp dir");
        let threads = (1, 4);
        let t = Instant::now();
        let runs = c6_run(threads.0, dir.path());
        if want(6) {
            let outcome = runs
                .as_ref()
                .map_err(Clone::clone)
                .and_then(|r| criterion6(r));
            all &= report(6, "bias trends", t, &outcome);
        }
        if want(8) {
            let t = Instant::now();
            let outcome = runs.and_then(|_| criterion8(dir.path(), threads));
            all &= report(8, "determinism", t, &outcome);
        }
    }
    if want(7) {
        let t = Instant::now();
        all &= report(7, "coverage at m=1000", t, &criterion7());
    }
    if !all {
        std::process::exit(1);
    }
}
