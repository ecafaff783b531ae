use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("negative index {0} in a functional over the naturals")]
    NegativeIndex(i64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("divergent series: {0}")]
    Divergent(String),
    #[error("truncation did not reach tolerance within {0} terms")]
    TruncationCap(usize),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("rejection sampler exceeded {0} attempts")]
    RejectionCap(usize),
    #[error("need at least {needed} usable points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
