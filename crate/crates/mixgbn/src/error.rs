//! Crate error type.

use thiserror::Error;

/// Errors surfaced by scoring, sampling and I/O operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A matrix that must be symmetric positive definite failed its
    /// Cholesky factorization. Callers decide how to react (an MCMC move
    /// is rejected, a CLI run aborts); nothing is silently regularized.
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    /// A scalar argument left the domain of a special function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Mismatched dimensions between data, graphs or parameter blocks.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An assignment vector with an empty or non-contiguous component.
    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),

    /// A graph edit that would introduce a directed cycle.
    #[error("cycle introduced: {0}")]
    Cycle(String),

    /// Invalid configuration or flag combination.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A metric whose value is undefined for the given inputs.
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// Malformed input data (CSV cell, edge list line, ...).
    #[error("parse error: {0}")]
    Parse(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code class: 1 for validation errors, 2 for runtime or
    /// numerical errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) | Error::Parse(_) | Error::Dimension(_) => 1,
            _ => 2,
        }
    }
}
