use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("non-numeric feature value {value:?} at row {row}, column {column}")]
    NonNumeric { row: usize, column: usize, value: String },

    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow { row: usize, found: usize, expected: usize },

    #[error("label column {0} not found")]
    LabelColumnMissing(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("size mismatch: {what} has length {found}, expected {expected}")]
    SizeMismatch {
        what: &'static str,
        found: usize,
        expected: usize,
    },

    #[error("point {0} has zero degree; widen eps or raise k")]
    ZeroDegree(usize),

    #[error("chain is periodic (closed class containing point {witness} has period {period}); retry with damping > 0")]
    PeriodicChain { period: usize, witness: usize },

    #[error("chain is reducible ({classes} strongly connected classes)")]
    ReducibleChain { classes: usize },

    #[error("power iteration stalled at L1 change {residual:e} after {iterations} iterations")]
    Stalled { iterations: usize, residual: f64 },

    #[error("power iteration did not converge in {iterations} iterations (L1 change {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("dense solve limited to {limit} points, got {n}")]
    TooLarge { n: usize, limit: usize },

    #[error("singular linear system")]
    Singular,
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn check_len(what: &'static str, found: usize, expected: usize) -> Result<()> {
        if found == expected {
            Ok(())
        } else {
            Err(Error::SizeMismatch { what, found, expected })
        }
    }
}
