//! Asymptotically unbiased priors.
//!
//! A prior whose log-gradient equals the field
//! `phi(theta) = -1/2 * sum_rs H^{rs}(theta) A_rs(theta)` makes the posterior
//! mean second-order unbiased. This crate builds that field from a model's
//! derivative tensors (`H`, `I`, `J`, `K`), decides whether a solving prior
//! exists (symmetry of the field's Jacobian), reconstructs the prior by axis
//! path integrals, and checks the resulting Bayes estimators by simulation on
//! the balanced nested error regression model.
//!
//! Module map:
//! - [`tensor`]: parameter domains, the [`tensor::DerivativeBundle`] contract and
//!   finite-difference oracles.
//! - [`prior`]: the `phi` field, integrability checks and prior construction.
//! - [`catalog`]: concrete models with closed-form priors and posterior means.
//! - [`mcmc`]: random variates and Gibbs samplers for the balanced NER model.
//! - [`sim`]: frequentist simulation harness and CSV output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod error;
pub mod mcmc;
pub mod prior;
pub mod rng;
pub mod sim;
pub mod special;
pub mod tensor;

pub use error::{Error, Result};
