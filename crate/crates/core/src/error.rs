//! Error type shared by every fallible operation in the crate.

use thiserror::Error;

/// Failure modes for construction and numerical routines.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum CoreError {
    /// Shape or label data is inconsistent: mismatched dimensions, unknown
    /// party labels, index out of range.
    #[error("structural error: {0}")]
    Structural(String),

    /// Numerical contract broken: a matrix fails a Hermiticity, trace,
    /// positivity, orthonormality, or completeness tolerance.
    #[error("contract violation: {0}")]
    Contract(String),

    /// An iterative solver exhausted its budget without reaching its
    /// convergence threshold.
    #[error("convergence failure: {0}")]
    Convergence(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;

impl CoreError {
    pub fn structural(msg: impl Into<String>) -> Self {
        CoreError::Structural(msg.into())
    }

    pub fn contract(msg: impl Into<String>) -> Self {
        CoreError::Contract(msg.into())
    }

    pub fn convergence(msg: impl Into<String>) -> Self {
        CoreError::Convergence(msg.into())
    }
}
