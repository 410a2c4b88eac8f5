use thiserror::Error;

/// Errors raised by the simulators.
///
/// The variants line up with the harness exit-status classes: usage and
/// validation problems, resource limits, and probabilistic failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("index out of range: {0}")]
    Index(String),
    #[error("invalid usage: {0}")]
    Usage(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("state corrupted: {0}")]
    StateCorruption(String),
    #[error("probabilistic failure: {0}")]
    ProbabilisticFailure(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
