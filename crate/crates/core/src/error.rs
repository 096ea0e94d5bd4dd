//! Error type shared by every module.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Resource,
    Integrity,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("factorization of {value} is incomplete (composite cofactor {cofactor})")]
    Incomplete { value: String, cofactor: String },
    #[error("division by zero")]
    DivisionByZero,
    #[error("field level mismatch: {0}")]
    LevelMismatch(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("resource limit: {what} needs {required}, limit is {limit}")]
    Resource {
        what: String,
        required: String,
        limit: String,
    },
    #[error("integrity check failed: {0}")]
    Integrity(String),
    #[error("missing input for {variant}: {what}")]
    MissingInput { variant: String, what: String },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Resource { .. } => ErrorKind::Resource,
            Error::Integrity(_) => ErrorKind::Integrity,
            _ => ErrorKind::Input,
        }
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn resource(
        what: impl Into<String>,
        required: impl ToString,
        limit: impl ToString,
    ) -> Self {
        Error::Resource {
            what: what.into(),
            required: required.to_string(),
            limit: limit.to_string(),
        }
    }
}
