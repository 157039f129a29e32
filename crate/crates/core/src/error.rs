use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operators live on different spaces")]
    SpaceMismatch,

    #[error("auxiliary mode b needs n_max_b >= 1 (got {n_max_b})")]
    Truncation { n_max_b: usize },

    /// The chosen detuning difference cannot realize the requested
    /// counter-diabatic coupling: sign(C) != sign(delta1 - delta2).
    #[error(
        "sign mismatch at t = {t}: auxiliary Rabi radicand {radicand:e} < 0; \
         swap the ordering of delta1 and delta2"
    )]
    SignMismatch { t: f64, radicand: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("matrix is not Hermitian (max |H - H^dag| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("eigenvector gauge broken at t = {t}: consecutive overlap {overlap:.4} < 0.9")]
    GaugeBreak { t: f64, overlap: f64 },

    #[error("integrator failed at t = {t}: step {step:e} fell below minimum")]
    StepFailure { t: f64, step: f64 },

    #[error("density matrix lost positivity: min eigenvalue {min_eigenvalue:e}")]
    PositivityLoss { min_eigenvalue: f64 },

    #[error("non-physical input: {0}")]
    NonPhysicalInput(String),

    #[error("invariant `{check}` violated: {detail}")]
    InvariantViolation { check: &'static str, detail: String },

    #[error("{0}")]
    Usage(String),

    #[error("{path}:{line}: {reason}")]
    ConfigParse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("{path}:{line}: unknown key `{key}`")]
    UnknownKey {
        path: PathBuf,
        line: usize,
        key: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
