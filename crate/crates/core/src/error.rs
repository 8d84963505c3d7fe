use thiserror::Error;

/// Errors raised by instance handling and the solvers.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("empty instance: no terminals")]
    EmptyInstance,

    #[error("instance is not normalized: {0}")]
    NotNormalized(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("infeasible solution: {0}")]
    Infeasible(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
