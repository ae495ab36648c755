//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature undecided: {0}")]
    QuadratureUndecided(String),

    #[error("tail estimate does not converge: {0}")]
    NonConvergentTail(String),

    #[error("state space too large: volume {volume} exceeds limit {limit}")]
    StateSpaceTooLarge { volume: usize, limit: usize },

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("boundary sensitivity check failed: {0}")]
    BoundarySensitivity(String),

    #[error("inconsistent scan: {0}")]
    InconsistentScan(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
