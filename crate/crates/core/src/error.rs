use thiserror::Error;

/// Errors raised by model construction, the approximation formulas and the estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation is not defined for this model (e.g. an auxiliary function of a
    /// regularly varying law).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A risk is strictly heavier-tailed than the reference risk `X1`.
    #[error("invalid ordering: risk {index} is heavier-tailed than the reference risk ({reason})")]
    InvalidOrdering { index: usize, reason: String },

    /// A scenario, correlation matrix or weight specification failed validation.
    #[error("validation error: {0}")]
    Validation(String),

    /// The analytic endpoint index disagrees with its numerical check.
    #[error("model consistency error: {0}")]
    ModelConsistency(String),

    /// No approximation formula applies to the scenario.
    #[error("dispatch error: {0}")]
    Dispatch(String),

    /// A numerical procedure did not reach its target accuracy.
    #[error("numeric failure: {what} (achieved relative tolerance {achieved:.3e})")]
    Numeric { what: String, achieved: f64 },

    /// Too few samples for an empirical estimate.
    #[error("sample size error: need at least {needed} samples, got {got}")]
    SampleSize { needed: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn validation<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Validation(msg.into()))
}
