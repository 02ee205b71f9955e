//! Error type shared across the crate.
//!
//! Errors split into two families: bad inputs or configuration (the caller
//! can fix the request) and numerical failures (the data or conditioning is
//! the problem). The CLI maps the first family to exit code 2 and the second
//! to exit code 3.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("conditioning failure: {0}; consider a larger sigma_n (sigma_n > sigma_v avoids numerical instability)")]
    Conditioning(String),
    #[error("norm bound too small: {0}")]
    NormBoundTooSmall(String),
    #[error("matrix not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("training diverged at epoch {epoch}: loss became non-finite")]
    TrainingDiverged { epoch: usize },
    #[error("non-finite value: {0}")]
    NonFinite(String),
}

impl Error {
    /// Process exit code for the CLI: 2 for config/input problems, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DimensionMismatch(..)
            | Error::InvalidInput(_)
            | Error::Config(_)
            | Error::Io(_)
            | Error::Json(_) => 2,
            Error::Conditioning(_)
            | Error::NormBoundTooSmall(_)
            | Error::NotPositiveDefinite(_)
            | Error::TrainingDiverged { .. }
            | Error::NonFinite(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
