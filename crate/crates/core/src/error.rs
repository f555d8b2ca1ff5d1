use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the clustering and outlier-detection routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected {expected} values, found {found}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: cannot parse `{token}` as a number")]
    BadNumber { line: usize, token: String },
    #[error("line {line}: non-finite coordinate `{token}`")]
    NonFinite { line: usize, token: String },
    #[error("no data rows found")]
    Empty,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unknown point id {0}")]
    UnknownId(usize),
    #[error("requested {k} clusters but only {n} points are available")]
    TooFewPoints { k: usize, n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("every point was removed as an outlier")]
    AllRemoved,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
