use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::catalog::ModelId;
use crate::error::{Error, Result};
use crate::mcmc::PriorFlavor;
use crate::tensor::ParamPoint;

/// `m` values of the standard simulation grid.
pub const STUDY_M_GRID: [usize; 5] = [10, 32, 100, 316, 1000];

/// True parameter setting for the NER simulation.
#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    /// `(beta1, beta2, tau^2, sigma^2) = (1, 1, 1, 1)`.
    I,
    /// `(1, 1, 0.5, 4)`.
    Ii,
    Custom(Vec<f64>),
}

impl Scenario {
    pub fn theta(&self) -> Vec<f64> {
        match self {
            Scenario::I => vec![1.0, 1.0, 1.0, 1.0],
            Scenario::Ii => vec![1.0, 1.0, 0.5, 4.0],
            Scenario::Custom(t) => t.clone(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Scenario::I => "i",
            Scenario::Ii => "ii",
            Scenario::Custom(_) => "custom",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "i" | "1" => Ok(Scenario::I),
            "ii" | "2" => Ok(Scenario::Ii),
            other => Ok(Scenario::Custom(parse_list(other)?)),
        }
    }
}

/// One simulation study: every `(prior, m)` cell gets `reps` replications.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelId,
    pub priors: Vec<PriorFlavor>,
    pub scenario: Scenario,
    pub m: Vec<usize>,
    pub n: usize,
    pub reps: usize,
    /// Retained draws and warmup for the AU and Jeffreys chains.
    pub chain: usize,
    pub warmup: usize,
    pub dg_chain: usize,
    pub dg_warmup: usize,
    pub seed: u64,
    /// Worker threads; 0 uses the available parallelism.
    pub threads: usize,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: ModelId::NerBalanced,
            priors: PriorFlavor::ALL.to_vec(),
            scenario: Scenario::I,
            m: STUDY_M_GRID.to_vec(),
            n: 5,
            reps: 2000,
            chain: 2000,
            warmup: 100,
            dg_chain: 20_000,
            dg_warmup: 1000,
            seed: 42,
            threads: 0,
            out: None,
        }
    }
}

pub(crate) fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| Error::Parse(format!("cannot parse `{t}` in list `{s}`")))
        })
        .collect()
}

fn parse_one<T: FromStr>(key: &str, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad value `{s}` for `{key}`")))
}

impl ExperimentConfig {
    /// Sets one key from its text form. Keys match the CLI flag names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        match key.as_str() {
            "model" => self.model = value.trim().parse()?,
            "prior" | "priors" => {
                self.priors = value
                    .split(',')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "scenario" => self.scenario = value.parse()?,
            "theta" => self.scenario = Scenario::Custom(parse_list(value)?),
            "m" => self.m = parse_list(value)?,
            "n" => self.n = parse_one(&key, value)?,
            "reps" => self.reps = parse_one(&key, value)?,
            "chain" => self.chain = parse_one(&key, value)?,
            "warmup" => self.warmup = parse_one(&key, value)?,
            "dg-chain" => self.dg_chain = parse_one(&key, value)?,
            "dg-warmup" => self.dg_warmup = parse_one(&key, value)?,
            "seed" => self.seed = parse_one(&key, value)?,
            "threads" => self.threads = parse_one(&key, value)?,
            "out" => self.out = Some(PathBuf::from(value.trim())),
            _ => return Err(Error::Parse(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Flat `key = value` text; `#` starts a comment.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("line {}: expected key = value", lineno + 1))
            })?;
            cfg.set(k, v)
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_kv_str(&text)
    }

    /// `(draws, warmup)` for `prior`.
    pub fn chain_length(&self, prior: PriorFlavor) -> (usize, usize) {
        match prior {
            PriorFlavor::Dg => (self.dg_chain, self.dg_warmup),
            _ => (self.chain, self.warmup),
        }
    }

    pub fn theta(&self) -> Vec<f64> {
        self.scenario.theta()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.model != ModelId::NerBalanced {
            return bad(format!(
                "simulation supports only ner-balanced, got {}",
                self.model
            ));
        }
        if self.priors.is_empty() {
            return bad("no prior flavors given".into());
        }
        if self.reps == 0 {
            return bad("reps must be at least 1".into());
        }
        if self.m.is_empty() || self.m.contains(&0) {
            return bad("m values must be positive".into());
        }
        if self.n < 2 {
            return bad("n must be at least 2".into());
        }
        if self.chain == 0 || self.dg_chain == 0 {
            return bad("chain lengths must be positive".into());
        }
        let theta = self.theta();
        if theta.len() != 4 {
            return bad(format!(
                "theta must be (beta1, beta2, tau2, sigma2), got {} values",
                theta.len()
            ));
        }
        if !(theta[2] > 0.0 && theta[3] > 0.0) || theta.iter().any(|x| !x.is_finite()) {
            return bad("variance components must be positive and finite".into());
        }
        Ok(())
    }
}

/// Parses a grid specification: one line per axis, either a comma list
/// (`0.5, 1, 2`) or `lo:hi:count` for evenly spaced values. The grid is
/// the Cartesian product, first axis slowest.
pub fn parse_grid_spec(text: &str) -> Result<Vec<ParamPoint>> {
    let mut axes: Vec<Vec<f64>> = Vec::new();
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let line = line.split_once('=').map_or(line, |(_, v)| v.trim());
        let parts: Vec<&str> = line.split(':').map(str::trim).collect();
        let axis = match parts.as_slice() {
            [lo, hi, count] => {
                let lo: f64 = parse_one("lo", lo)?;
                let hi: f64 = parse_one("hi", hi)?;
                let count: usize = parse_one("count", count)?;
                if count == 0 {
                    return Err(Error::Parse("grid axis needs at least one point".into()));
                }
                if count == 1 {
                    vec![lo]
                } else {
                    (0..count)
                        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
                        .collect()
                }
            }
            [list] => parse_list(list)?,
            _ => return Err(Error::Parse(format!("bad grid axis `{line}`"))),
        };
        if axis.is_empty() {
            return Err(Error::Parse("empty grid axis".into()));
        }
        axes.push(axis);
    }
    if axes.is_empty() {
        return Err(Error::Parse("grid spec has no axes".into()));
    }
    let mut points: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in &axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    Ok(points.into_iter().map(ParamPoint::from).collect())
}
