use thiserror::Error;

/// Failures surfaced by builders, constructors and the harness.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CeerError {
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("input violation: {0}")]
    InputViolation(String),
    #[error("promise violated: {0}")]
    PromiseViolated(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl CeerError {
    pub fn budget(what: impl Into<String>) -> Self {
        CeerError::BudgetExceeded(what.into())
    }
}

pub type Result<T> = std::result::Result<T, CeerError>;
