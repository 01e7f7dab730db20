//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    /// Two inputs that must live in the same ambient space do not.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A weight vector violates the measure contract (negativity, zero mass,
    /// length mismatch).
    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    /// An input collection that must be non-empty is empty.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// A scalar or size parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// More clusters requested than distinct points available.
    #[error("cannot place {k} centers on {distinct} distinct points")]
    TooManyClusters { k: usize, distinct: usize },

    /// The exact solver failed to certify optimality. Indicates an internal
    /// fault, not a property of the input.
    #[error("transport solver stalled: {0}")]
    SolverStalled(String),

    /// A data file does not match the expected schema.
    #[error("bad file format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
