use std::io;

use thiserror::Error;

use crate::series::Unit;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unit mismatch: expected {expected}, found {found}")]
    UnitMismatch { expected: Unit, found: Unit },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("size error: {0}")]
    Size(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("value out of range: {0}")]
    Range(String),

    /// An input carries the wrong scale or kind tag for the requested stage.
    #[error("state error: {0}")]
    State(String),

    #[error("degenerate signal: {0}")]
    Degenerate(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("invalid synthesis spec: {0}")]
    Spec(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Whether the error is a contract violation between pipeline stages
    /// (wrong unit, scale or feature kind) rather than bad input data.
    pub fn is_contract(&self) -> bool {
        matches!(self, Error::UnitMismatch { .. } | Error::State(_))
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Numeric(_) | Error::Degenerate(_))
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<hound::Error> for Error {
    fn from(e: hound::Error) -> Self {
        match e {
            hound::Error::IoError(io) => Error::Io(io),
            other => Error::Format(other.to_string()),
        }
    }
}
