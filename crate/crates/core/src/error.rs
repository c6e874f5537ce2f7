use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the in-memory API.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch in {op}: expected {expected}, found {found}")]
    DimensionMismatch {
        op: &'static str,
        expected: String,
        found: String,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn shape(
        op: &'static str,
        expected: impl std::fmt::Display,
        found: impl std::fmt::Display,
    ) -> Self {
        Error::DimensionMismatch {
            op,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised while reading or writing on-disk artifacts.
#[derive(Error, Debug)]
pub enum DataError {
    #[error("missing file {}", .0.display())]
    MissingFile(PathBuf),
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("{}: bad magic, expected {expected:?}", path.display())]
    BadMagic { path: PathBuf, expected: String },
    #[error("{what}: declared {declared}, found {found}")]
    DimensionMismatch {
        what: String,
        declared: usize,
        found: usize,
    },
    #[error("node {node}: label {label} out of range for {classes} classes")]
    LabelOutOfRange {
        node: usize,
        label: usize,
        classes: usize,
    },
    #[error("node {node}: assigned to more than one split")]
    OverlappingMasks { node: usize },
    #[error("edge ({u}, {v}) references a node >= {nodes}")]
    EdgeOutOfRange { u: usize, v: usize, nodes: usize },
    #[error(transparent)]
    Invalid(#[from] Error),
}
