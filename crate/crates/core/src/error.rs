//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("grid mismatch between fields")]
    GridMismatch,

    #[error("operator error: {0}")]
    Operator(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("solver aborted: {0}")]
    SolverAbort(String),

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("window contaminated by boundary effects: {0}")]
    WindowContaminated(String),
}

pub type Result<T> = std::result::Result<T, Error>;
