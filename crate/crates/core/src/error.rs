use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid neighborhood width {0}; must be finite and > 0")]
    InvalidWidth(f64),

    #[error("epoch {epoch} is past the end of the annealing schedule ({t_end})")]
    EpochOutOfRange { epoch: usize, t_end: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("dataset has {0} class(es); at least 2 are required")]
    TooFewClasses(usize),

    #[error("layer index {index} out of range (network has {layers} hidden layers)")]
    LayerOutOfRange { index: usize, layers: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: row {row}: {message}")]
    Csv { path: PathBuf, row: usize, message: String },

    #[error("{path}, row {row}, column {column}: cannot parse {value:?} as a number")]
    NonNumericCell {
        path: PathBuf,
        row: usize,
        column: usize,
        value: String,
    },

    #[error("{path}: {message}")]
    Idx { path: PathBuf, message: String },

    #[error("unknown animals context {0:?} (expected carnivore, speed or avian)")]
    UnknownContext(String),

    #[error("gradient check degenerate: {excluded} of {total} parameters sit on a BMU switching boundary")]
    DegenerateGradientCheck { excluded: usize, total: usize },

    #[error("snapshot has no hits")]
    EmptySnapshot,

    #[error("malformed document: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn check_dim(context: &'static str, expected: usize, actual: usize) -> Result<()> {
        if expected == actual {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                context,
                expected,
                actual,
            })
        }
    }
}
