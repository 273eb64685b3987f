//! Parameter-space primitives and the derivative-tensor contract.
//!
//! Every model exposes, at an interior point `theta`, the limiting curvature
//! `H`, the information `I`, and the third-order tensors
//! `J[r][s][t] = E{d2l/dr ds * dl/dt}` and `K[r][s][t] = E{d3l/dr ds dt}`
//! (all per unit of sample size). Tensors are dense and indexed `(r, s, t)`.

mod checks;
mod fault;
mod fd;

use std::fmt;
use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub use checks::{
    check_full_rank_gram, check_spd, condition_number, invert_spd, verify_information_identity,
    IdentityReport, DEFAULT_MAX_CONDITION,
};
pub use fault::{Fault, FaultInjected};
pub use fd::{fd_gradient, fd_hessian, fd_jacobian, fd_jacobian_extrapolated, fd_third, step_for};

/// One end of a domain interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    NegInfinity,
    Finite(f64),
    PosInfinity,
}

impl Bound {
    /// `true` when `x` lies strictly above this bound.
    pub fn below(&self, x: f64) -> bool {
        match *self {
            Bound::NegInfinity => x.is_finite(),
            Bound::Finite(b) => x > b,
            Bound::PosInfinity => false,
        }
    }

    /// `true` when `x` lies strictly below this bound.
    pub fn above(&self, x: f64) -> bool {
        match *self {
            Bound::NegInfinity => false,
            Bound::Finite(b) => x < b,
            Bound::PosInfinity => x.is_finite(),
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::NegInfinity => write!(f, "-inf"),
            Bound::Finite(b) => write!(f, "{b}"),
            Bound::PosInfinity => write!(f, "+inf"),
        }
    }
}

/// Axis-aligned box `prod_t (lower[t], upper[t])`.
#[derive(Debug, Clone, PartialEq)]
pub struct RectDomain {
    lower: Vec<Bound>,
    upper: Vec<Bound>,
}

impl RectDomain {
    pub fn new(lower: Vec<Bound>, upper: Vec<Bound>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidConfig(format!(
                "domain needs matching non-empty bounds (got {} and {})",
                lower.len(),
                upper.len()
            )));
        }
        for (t, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            let ok = match (lo, hi) {
                (Bound::PosInfinity, _) | (_, Bound::NegInfinity) => false,
                (Bound::Finite(a), Bound::Finite(b)) => a < b,
                _ => true,
            };
            if !ok {
                return Err(Error::InvalidConfig(format!(
                    "empty interval ({lo}, {hi}) on axis {t}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// `k` unbounded axes followed by `j` positive half-lines.
    pub fn real_then_positive(k: usize, j: usize) -> Self {
        let mut lower = vec![Bound::NegInfinity; k];
        lower.extend(std::iter::repeat_n(Bound::Finite(0.0), j));
        let upper = vec![Bound::PosInfinity; k + j];
        Self::new(lower, upper).expect("non-empty domain")
    }

    pub fn unit_interval() -> Self {
        Self::new(vec![Bound::Finite(0.0)], vec![Bound::Finite(1.0)]).expect("valid")
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[Bound] {
        &self.lower
    }

    pub fn upper(&self) -> &[Bound] {
        &self.upper
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && theta
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&x, (lo, hi))| lo.below(x) && hi.above(x))
    }

    /// Fails with `DomainViolation` unless `theta +- margin[t] e_t` stays inside.
    pub fn require_margin(&self, theta: &[f64], margin: &[f64]) -> Result<()> {
        self.require_dim(theta.len())?;
        for t in 0..self.dim() {
            let (lo, hi) = (theta[t] - margin[t], theta[t] + margin[t]);
            if !(self.lower[t].below(lo) && self.upper[t].above(hi)) {
                return Err(Error::DomainViolation {
                    axis: t,
                    point: theta.to_vec(),
                });
            }
        }
        Ok(())
    }

    pub fn require_interior(&self, theta: &[f64]) -> Result<()> {
        self.require_margin(theta, &vec![0.0; self.dim()])
    }

    pub(crate) fn require_dim(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }
}

/// A parameter vector `(theta_1, ..., theta_p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamPoint(pub Vec<f64>);

impl ParamPoint {
    pub fn new(coords: impl Into<Vec<f64>>) -> Self {
        Self(coords.into())
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl std::ops::Deref for ParamPoint {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for ParamPoint {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl From<&[f64]> for ParamPoint {
    fn from(v: &[f64]) -> Self {
        Self(v.to_vec())
    }
}

/// Dense `p x p x p` tensor, row-major in `(r, s, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dim: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut out = Self::zeros(dim);
        for r in 0..dim {
            for s in 0..dim {
                for t in 0..dim {
                    out[(r, s, t)] = f(r, s, t);
                }
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Sets `(r,s,t)` and every permutation of it.
    pub fn set_symmetric(&mut self, r: usize, s: usize, t: usize, v: f64) {
        for (a, b, c) in [
            (r, s, t),
            (r, t, s),
            (s, r, t),
            (s, t, r),
            (t, r, s),
            (t, s, r),
        ] {
            self[(a, b, c)] = v;
        }
    }

    pub fn scale(&mut self, k: f64) {
        self.data.iter_mut().for_each(|x| *x *= k);
    }

    pub fn add_assign(&mut self, other: &Tensor3) {
        debug_assert_eq!(self.dim, other.dim);
        self.data
            .iter_mut()
            .zip(&other.data)
            .for_each(|(a, b)| *a += b);
    }
}

impl Index<(usize, usize, usize)> for Tensor3 {
    type Output = f64;

    fn index(&self, (r, s, t): (usize, usize, usize)) -> &f64 {
        &self.data[(r * self.dim + s) * self.dim + t]
    }
}

impl IndexMut<(usize, usize, usize)> for Tensor3 {
    fn index_mut(&mut self, (r, s, t): (usize, usize, usize)) -> &mut f64 {
        &mut self.data[(r * self.dim + s) * self.dim + t]
    }
}

/// Tolerances shared by the finite-difference checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TensorTolerance {
    pub rel: f64,
    pub abs: f64,
    /// Base central-difference step; the step on axis `t` is `fd_step * (1 + |theta_t|)`.
    pub fd_step: f64,
}

impl Default for TensorTolerance {
    fn default() -> Self {
        Self {
            rel: 1e-6,
            abs: 1e-9,
            fd_step: 1e-5,
        }
    }
}

impl TensorTolerance {
    pub fn new(rel: f64, abs: f64, fd_step: f64) -> Result<Self> {
        if !(rel > 0.0 && abs > 0.0 && fd_step > 0.0) {
            return Err(Error::InvalidConfig(
                "tolerances must be strictly positive".into(),
            ));
        }
        Ok(Self { rel, abs, fd_step })
    }
}

/// The derivative-tensor contract every model implements.
///
/// Implementations are immutable and evaluators are pure, so bundles can be
/// shared across threads.
pub trait DerivativeBundle: Send + Sync {
    fn name(&self) -> &str;

    fn domain(&self) -> &RectDomain;

    fn dim(&self) -> usize {
        self.domain().dim()
    }

    /// Limiting negative scaled Hessian of the log-likelihood.
    fn h(&self, theta: &[f64]) -> DMatrix<f64>;

    /// Information matrix.
    fn info(&self, theta: &[f64]) -> DMatrix<f64>;

    /// `J[(r, s, t)]`, symmetric in `(r, s)`.
    fn j(&self, theta: &[f64]) -> Tensor3;

    /// `K[(r, s, t)]`, fully symmetric.
    fn k(&self, theta: &[f64]) -> Tensor3;

    /// Observations are i.i.d. draws from a single density.
    fn is_iid(&self) -> bool {
        false
    }

    /// `dI_rs/dt + J_rs,t + K_rst = 0` holds for this bundle. True for every
    /// i.i.d. model and for models whose tensors are exact averages of
    /// per-block expectations.
    fn satisfies_information_identity(&self) -> bool {
        self.is_iid()
    }

    /// Log-density of a single observation, when the model is i.i.d.
    fn log_density(&self, _x: f64, _theta: &[f64]) -> Option<f64> {
        None
    }
}
