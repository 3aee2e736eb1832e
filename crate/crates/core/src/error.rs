use thiserror::Error;

/// Errors raised by the learners, environments and geometric utilities.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DriftError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("hypothesis kinds are not comparable: {0}")]
    KindMismatch(String),

    #[error("unknown {registry} `{name}`")]
    UnknownName { registry: &'static str, name: String },
}

pub type Result<T> = std::result::Result<T, DriftError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> DriftError {
    DriftError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
