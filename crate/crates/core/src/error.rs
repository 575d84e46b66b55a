use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DqsError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("truncation leakage {leakage:.3e} exceeds tolerance {tolerance:.3e} ({context})")]
    Truncation {
        leakage: f64,
        tolerance: f64,
        context: String,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A numerical estimate could not be trusted (finite-difference step, validity ratio).
    #[error("numerical validity: {0}")]
    Validity(String),
}

impl DqsError {
    /// True for failures caused by numerics rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            DqsError::Overflow(_) | DqsError::Truncation { .. } | DqsError::Validity(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, DqsError>;
