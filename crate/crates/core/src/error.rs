use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error("unstable: {0}")]
    Unstable(String),
    #[error("policy iteration did not converge after {0} iterations")]
    NonConvergence(usize),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("policy table has no entry for state {0}")]
    MissingState(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}

pub(crate) fn unstable<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Unstable(msg.into()))
}
