//! Random variates and Gibbs samplers for the balanced NER posterior.
//!
//! Three priors are supported: the asymptotically unbiased prior
//! `{sigma^2 (sigma^2 + n tau^2)}^-2`, Jeffreys' prior for the variance
//! components `{sigma^2 (sigma^2 + n tau^2)}^-1`, and the hierarchical prior
//! with flat `beta` and independent inverse-gamma variances (DG). `beta` is
//! flat under all three.

mod gibbs;
mod summary;
mod variates;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub use gibbs::{gibbs_ner, BalancedStats};
pub use summary::{effective_sample_size, quantile_sorted, summarize, ChainSummary};
pub use variates::{ln_gamma_p, sample_inverse_gamma, sample_truncated_gamma01, REJECTION_MASS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PriorFlavor {
    Au,
    Jeffreys,
    Dg,
}

impl PriorFlavor {
    pub const ALL: [PriorFlavor; 3] = [PriorFlavor::Au, PriorFlavor::Jeffreys, PriorFlavor::Dg];

    pub fn as_str(self) -> &'static str {
        match self {
            PriorFlavor::Au => "au",
            PriorFlavor::Jeffreys => "jeffreys",
            PriorFlavor::Dg => "dg",
        }
    }

    /// Default `(draws, warmup)`; DG chains mix more slowly.
    pub fn default_length(self) -> (usize, usize) {
        match self {
            PriorFlavor::Dg => (20_000, 1_000),
            _ => (2_000, 100),
        }
    }
}

impl fmt::Display for PriorFlavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PriorFlavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PriorFlavor::ALL
            .into_iter()
            .find(|f| f.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::Parse(format!("unknown prior `{s}` (expected au, jeffreys or dg)"))
            })
    }
}

/// Inverse-gamma hyperparameters of the DG prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgHyper {
    pub a_tau: f64,
    pub b_tau: f64,
    pub a_sigma: f64,
    pub b_sigma: f64,
}

impl Default for DgHyper {
    fn default() -> Self {
        Self {
            a_tau: 5.0,
            b_tau: 5.0,
            a_sigma: 5.0,
            b_sigma: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsConfig {
    /// Retained draws after warmup.
    pub draws: usize,
    pub warmup: usize,
    pub seed: u64,
    pub prior: PriorFlavor,
    pub dg: DgHyper,
}

impl GibbsConfig {
    /// Default chain lengths for `prior`.
    pub fn new(prior: PriorFlavor, seed: u64) -> Self {
        let (draws, warmup) = prior.default_length();
        Self {
            draws,
            warmup,
            seed,
            prior,
            dg: DgHyper::default(),
        }
    }

    pub fn with_length(mut self, draws: usize, warmup: usize) -> Self {
        self.draws = draws;
        self.warmup = warmup;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.draws == 0 {
            return Err(Error::InvalidConfig(
                "chain needs at least one retained draw".into(),
            ));
        }
        let h = self.dg;
        if ![h.a_tau, h.b_tau, h.a_sigma, h.b_sigma]
            .iter()
            .all(|x| *x > 0.0 && x.is_finite())
        {
            return Err(Error::InvalidConfig(
                "DG hyperparameters must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Post-warmup draws, one row per iteration, columns `(beta, tau^2, sigma^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub draws: DMatrix<f64>,
    pub warmup: usize,
    pub seed: u64,
}

impl Chain {
    pub fn new(draws: DMatrix<f64>, warmup: usize, seed: u64) -> Self {
        Self {
            draws,
            warmup,
            seed,
        }
    }

    pub fn len(&self) -> usize {
        self.draws.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.draws.ncols()
    }

    /// Column `j` as a slice.
    pub fn param(&self, j: usize) -> &[f64] {
        let n = self.draws.nrows();
        &self.draws.as_slice()[j * n..(j + 1) * n]
    }
}
