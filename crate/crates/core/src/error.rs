use thiserror::Error;

/// Errors produced anywhere in the release pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
#[non_exhaustive]
pub enum Error {
    /// A symbol or index fell outside its alphabet.
    #[error("out of bounds: {0}")]
    Bounds(String),

    /// Two operands that must agree in length or alphabet do not.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// The input lies outside the domain of the operation (e.g. an empty database).
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid parameter value.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A protocol role received something it cannot accept in its current state.
    #[error("protocol error: {0}")]
    Protocol(String),

    /// The exhaustive oracle was asked for an instance that is too large to enumerate.
    #[error("instance too large to enumerate: {0}")]
    Capacity(String),

    /// Malformed wire bytes.
    #[error("decode error: {0}")]
    Decode(String),

    /// Dataset ingestion failure (unknown category values, unreadable input).
    #[error("ingest error: {0}")]
    Ingest(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
