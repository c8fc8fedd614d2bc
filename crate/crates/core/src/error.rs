use thiserror::Error;

use crate::phase_retrieval::SolverResult;

/// Errors produced by the transform, sampling and retrieval routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Two signals that must live on the same grid do not.
    #[error("incompatible grids: {0}")]
    GridMismatch(String),

    /// A parameter violates an operation's precondition (b = 0, det ≠ 1, s ≤ 0, ...).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A shift that must be a multiple of the grid step is not.
    #[error("shift {requested} is not aligned with grid step {step}; nearest aligned value is {nearest}")]
    Misaligned {
        requested: f64,
        step: f64,
        nearest: f64,
    },

    /// Sampling parameters outside the admissible range of a uniqueness statement.
    #[error("inadmissible sampling parameters: {0}")]
    Admissibility(String),

    /// Input that does not describe a valid object (length mismatch, non-finite samples, ...).
    #[error("malformed input: {0}")]
    Malformed(String),

    /// Every solver restart failed. Carries the best partial result, if any restart produced one.
    #[error("solver failed: {message}")]
    Solver {
        message: String,
        best: Option<Box<SolverResult>>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
