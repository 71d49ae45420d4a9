use thiserror::Error;

/// Errors raised by the simulation and estimation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("predictor column {column} has zero variance")]
    DegeneratePredictor { column: usize },

    #[error("outcome is degenerate: {0}")]
    DegenerateOutcome(String),

    #[error("input is degenerate: {0}")]
    DegenerateInput(String),

    #[error("all prior mass vanished in the posterior for row {row}")]
    PosteriorUnderflow { row: usize },

    #[error("{coefficient}: {source}")]
    Coefficient {
        coefficient: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("replication failed at m = {m}, replication {rep}: {source}")]
    Replication {
        m: usize,
        rep: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("csv: {0}")]
    Csv(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
