use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("rectangle ({x}, {y}, {w}, {h}) exceeds {width}x{height} image")]
    Bounds {
        x: usize,
        y: usize,
        w: usize,
        h: usize,
        width: usize,
        height: usize,
    },
    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("codebook training failed: {0}")]
    Training(String),
    #[error("malformed cascade model: {0}")]
    Model(String),
    #[error("no pixel in the face region passes the saturation/value gates")]
    EmptySkinModel,
    #[error("degenerate shape: {0}")]
    DegenerateShape(String),
    #[error("gesture database: {0}")]
    Database(String),
    #[error("time went backwards: {now} < {last}")]
    TimeRegression { now: f64, last: f64 },
    #[error("degenerate ROC: {positives} positives, {negatives} negatives")]
    DegenerateRoc { positives: usize, negatives: usize },
    #[error("missing frame file {0}")]
    MissingFrame(PathBuf),
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}
