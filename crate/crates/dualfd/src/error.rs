use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A request that cannot be satisfied as configured (too few points,
    /// unsatisfiable accuracy rule, defect separation violated, ...).
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    /// Malformed input data (non-quad primal face, coincident points, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A numerical operation failed (singular system, divergence, ...).
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// Mesh file could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
