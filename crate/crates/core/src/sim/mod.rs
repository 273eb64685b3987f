//! Frequentist simulation harness for the balanced NER model.
//!
//! Every `(prior, m)` cell runs `R` replications. Replication `r` draws its
//! dataset from the stream `(seed, DATA, m, r)`, so all priors see the same
//! datasets, and its chain from `(seed, prior, m, r)`. Results are reduced in
//! replication order, which makes the output independent of the worker count.

mod config;
mod csv;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::catalog::{generate_ner, CovariateSpec, ModelId, NerDesign};
use crate::error::{Error, Result};
use crate::mcmc::{gibbs_ner, summarize, GibbsConfig, PriorFlavor};
use crate::rng;

pub use config::{parse_grid_spec, ExperimentConfig, Scenario, STUDY_M_GRID};
pub use csv::{emit_csv, parse_csv, read_csv, render_csv, write_metadata, CSV_HEADER};

/// Stream label for data generation.
const DATA_STREAM: u64 = 0;

/// Parameter names in `theta` order.
pub const PARAMETERS: [&str; 4] = ["beta1", "beta2", "tau2", "sigma2"];

/// Failures are tolerated only while below this fraction of `R`.
pub const MAX_FAILURE_FRACTION: f64 = 0.001;

/// Frequentist metrics of the posterior mean for one parameter in one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub model: ModelId,
    pub prior: PriorFlavor,
    pub scenario: String,
    pub m: usize,
    pub n: usize,
    pub parameter: String,
    /// `|mean of posterior means - theta_true|`.
    pub abs_bias: f64,
    pub mse: f64,
    /// Fraction of replications whose equal-tailed 95% interval covers the truth.
    pub coverage95: f64,
    /// Replications that contributed (requested minus excluded failures).
    pub reps: usize,
    pub seed: u64,
}

impl MetricsRecord {
    /// Position of the parameter in `theta`, used for sorting.
    pub fn parameter_index(&self) -> usize {
        PARAMETERS
            .iter()
            .position(|p| *p == self.parameter)
            .unwrap_or(usize::MAX)
    }
}

/// What one replication contributes.
#[derive(Debug, Clone, Copy)]
struct RepOutcome {
    estimate: [f64; 4],
    covered: [bool; 4],
    min_ess: f64,
}

fn stream_label(prior: PriorFlavor) -> u64 {
    1 + prior as u64
}

fn run_replication(
    cfg: &ExperimentConfig,
    prior: PriorFlavor,
    m: usize,
    rep: usize,
    theta: &[f64],
) -> Result<RepOutcome> {
    let design = NerDesign::balanced(m, cfg.n, CovariateSpec::simulation_default());
    let data = generate_ner(
        &design,
        theta,
        &mut rng::stream(cfg.seed, &[DATA_STREAM, m as u64, rep as u64]),
    )?;
    let (draws, warmup) = cfg.chain_length(prior);
    let gcfg = GibbsConfig::new(prior, cfg.seed).with_length(draws, warmup);
    let chain = gibbs_ner(
        &data,
        &gcfg,
        &mut rng::stream(cfg.seed, &[stream_label(prior), m as u64, rep as u64]),
    )?;
    let s = summarize(&chain);
    let mut out = RepOutcome {
        estimate: [0.0; 4],
        covered: [false; 4],
        min_ess: s.ess.iter().copied().fold(f64::INFINITY, f64::min),
    };
    for (j, &t) in theta.iter().enumerate() {
        out.estimate[j] = s.mean[j];
        out.covered[j] = s.covers(j, t);
    }
    Ok(out)
}

fn worker_count(requested: usize, jobs: usize) -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    let n = if requested == 0 { available } else { requested };
    n.clamp(1, jobs.max(1))
}

/// Runs `reps` replications of one cell on `threads` workers; results come
/// back indexed by replication.
fn run_cell(
    cfg: &ExperimentConfig,
    prior: PriorFlavor,
    m: usize,
    theta: &[f64],
) -> Vec<Result<RepOutcome>> {
    let threads = worker_count(cfg.threads, cfg.reps);
    let next = AtomicUsize::new(0);
    let mut slots: Vec<Option<Result<RepOutcome>>> = (0..cfg.reps).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|_| {
                scope.spawn(|| {
                    let mut done = Vec::new();
                    loop {
                        let rep = next.fetch_add(1, Ordering::Relaxed);
                        if rep >= cfg.reps {
                            break;
                        }
                        done.push((rep, run_replication(cfg, prior, m, rep, theta)));
                    }
                    done
                })
            })
            .collect();
        for h in handles {
            for (rep, r) in h.join().expect("replication worker panicked") {
                slots[rep] = Some(r);
            }
        }
    });
    slots
        .into_iter()
        .map(|s| s.expect("every replication ran"))
        .collect()
}

/// Runs every `(prior, m)` cell of `cfg` and returns one record per parameter.
///
/// Replications that fail are logged and excluded while they stay below
/// [`MAX_FAILURE_FRACTION`] of `R`; otherwise the run aborts.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<MetricsRecord>> {
    cfg.validate()?;
    let theta = cfg.theta();
    let mut records = Vec::new();
    for &prior in &cfg.priors {
        for &m in &cfg.m {
            log::info!("running prior={prior} m={m} reps={}", cfg.reps);
            let outcomes = run_cell(cfg, prior, m, &theta);
            let mut failures = Vec::new();
            let mut sum = [0.0; 4];
            let mut sq = [0.0; 4];
            let mut cover = [0usize; 4];
            let mut min_ess = f64::INFINITY;
            let mut used = 0usize;
            for (rep, o) in outcomes.into_iter().enumerate() {
                match o {
                    Ok(o) => {
                        used += 1;
                        min_ess = min_ess.min(o.min_ess);
                        for j in 0..4 {
                            sum[j] += o.estimate[j];
                            sq[j] += (o.estimate[j] - theta[j]).powi(2);
                            cover[j] += o.covered[j] as usize;
                        }
                    }
                    Err(e) => {
                        log::warn!("prior={prior} m={m} rep={rep} failed: {e}");
                        failures.push(format!("rep {rep}: {e}"));
                    }
                }
            }
            if failures.len() as f64 >= MAX_FAILURE_FRACTION * cfg.reps as f64 {
                return Err(Error::Aborted(format!(
                    "prior={prior} m={m}: {} of {} replications failed; first: {}",
                    failures.len(),
                    cfg.reps,
                    failures[0]
                )));
            }
            log::info!("prior={prior} m={m}: smallest ESS {min_ess:.0}");
            let r = used as f64;
            for (j, name) in PARAMETERS.iter().enumerate() {
                records.push(MetricsRecord {
                    model: cfg.model,
                    prior,
                    scenario: cfg.scenario.label().to_string(),
                    m,
                    n: cfg.n,
                    parameter: name.to_string(),
                    abs_bias: (sum[j] / r - theta[j]).abs(),
                    mse: sq[j] / r,
                    coverage95: cover[j] as f64 / r,
                    reps: used,
                    seed: cfg.seed,
                });
            }
        }
    }
    Ok(records)
}

/// Figures of the simulation study. Each reproduction runs the
/// full `(prior x m)` grid; the CSV carries every metric for every
/// parameter, and the figure picks its column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Absolute bias of `tau^2` and `sigma^2`.
    Bias,
    /// Absolute bias of `beta`.
    BiasBeta,
    Mse,
    Coverage,
}

impl Figure {
    pub const ALL: [Figure; 4] = [
        Figure::Bias,
        Figure::BiasBeta,
        Figure::Mse,
        Figure::Coverage,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Figure::Bias => "bias",
            Figure::BiasBeta => "bias-beta",
            Figure::Mse => "mse",
            Figure::Coverage => "coverage",
        }
    }

    /// Parameters plotted in the figure.
    pub fn parameters(self) -> &'static [&'static str] {
        match self {
            Figure::Bias => &PARAMETERS[2..],
            Figure::BiasBeta => &PARAMETERS[..2],
            Figure::Mse | Figure::Coverage => &PARAMETERS,
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| {
                Error::Parse(format!(
                    "unknown figure `{s}` (expected bias, bias-beta, mse or coverage)"
                ))
            })
    }
}

/// The configuration reproducing `figure`: all priors over the standard
/// `m` grid with default chain lengths.
pub fn figure_config(
    figure: Figure,
    scenario: Scenario,
    reps: usize,
    seed: u64,
) -> Result<ExperimentConfig> {
    if reps < 100 {
        return Err(Error::InvalidConfig(format!(
            "figure {figure} needs at least 100 replications, got {reps}"
        )));
    }
    Ok(ExperimentConfig {
        scenario,
        reps,
        seed,
        ..ExperimentConfig::default()
    })
}

pub fn reproduce_figure(
    figure: Figure,
    scenario: Scenario,
    reps: usize,
    seed: u64,
    threads: usize,
) -> Result<Vec<MetricsRecord>> {
    let mut cfg = figure_config(figure, scenario, reps, seed)?;
    cfg.threads = threads;
    run_experiment(&cfg)
}
