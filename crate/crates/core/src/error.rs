use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid MDP: {0}")]
    InvalidMdp(String),
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("support violation at index {0}: q is zero where p is positive")]
    SupportViolation(usize),
    #[error("non-positive density at index {0}")]
    NonPositiveDensity(usize),
    #[error("linear solve failed: {0}")]
    SolverFailure(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported discriminator class: {0}")]
    UnsupportedClass(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
