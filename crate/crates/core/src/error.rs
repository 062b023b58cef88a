use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}, column {column}: cannot parse {text:?} as a number")]
    Parse { row: usize, column: usize, text: String },
    #[error("row {row}, column {column}: value {value} is not finite")]
    NonFinite { row: usize, column: usize, value: f64 },
    #[error("row {row} has {found} columns, expected {expected}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("dataset needs at least {required} rows, found {found}")]
    TooFewRows { required: usize, found: usize },
    #[error("object {0} is not covered by the assignment")]
    NotCovered(usize),
    #[error("assignments cover different object sets")]
    CoverageMismatch,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("cannot form {k} clusters from {distinct} distinct rows")]
    TooManyClusters { k: usize, distinct: usize },
    #[error("cluster sizes contain an empty cluster")]
    EmptyCluster,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("configuration error: {0}")]
    Config(String),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) | Error::InvalidArgument(_) => ErrorClass::Config,
            Error::Io { .. }
            | Error::Csv(_)
            | Error::Parse { .. }
            | Error::NonFinite { .. }
            | Error::Ragged { .. }
            | Error::TooFewRows { .. }
            | Error::DimensionMismatch { .. }
            | Error::TooManyClusters { .. } => ErrorClass::Data,
            Error::NotCovered(_) | Error::CoverageMismatch | Error::EmptyCluster | Error::Numerical(_) => {
                ErrorClass::Numerical
            }
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
