use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point:?} (or its stencil) leaves the domain on axis {axis}")]
    DomainViolation { axis: usize, point: Vec<f64> },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("curvature matrix is not positive definite or is ill-conditioned: {0}")]
    SingularCurvature(String),

    #[error("H differs from I by {deviation:.3e}; the H = I shortcut does not apply")]
    HNotEqualI { deviation: f64 },

    #[error("information matrix is not diagonal (off-diagonal mass {off_diagonal:.3e})")]
    NotDiagonal { off_diagonal: f64 },

    #[error("bundle `{0}` is not flagged i.i.d.")]
    NotIid(String),

    #[error("phi field is not integrable: {0}")]
    NonIntegrable(String),

    #[error("adaptive quadrature on [{a}, {b}] exceeded its subdivision budget")]
    QuadratureFailure { a: f64, b: f64 },

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("truncated gamma mass on (0,1) underflows (shape {shape}, rate {rate})")]
    MassUnderflow { shape: f64, rate: f64 },

    #[error("posterior propriety conditions fail: {0}")]
    ProprietyViolation(String),

    #[error("non-finite draw of {parameter} at iteration {iteration}; state {state:?}")]
    NonFiniteDraw {
        iteration: usize,
        parameter: String,
        state: Vec<f64>,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("run aborted: {0}")]
    Aborted(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
