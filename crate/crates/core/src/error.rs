use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the pipeline stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("source support violates the sensor circle: {0}")]
    SupportViolation(String),

    #[error("stability condition violated: {0}")]
    Stability(String),

    #[error("band edge {kappa} exceeds the Nyquist frequency {nyquist}")]
    AboveNyquist { kappa: f64, nyquist: f64 },

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("empty mask: no pixel satisfies |u0| >= {0}")]
    EmptyMask(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
