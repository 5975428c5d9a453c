use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing contour file: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("I/O error on {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed input in {}: {message}", .path.display())]
    Parse { path: PathBuf, message: String },

    #[error("degenerate contour {id}: {reason}")]
    DegenerateContour { id: String, reason: String },

    #[error("duplicate contour id {0}")]
    DuplicateId(String),

    #[error("need n >= 2 contours, got {0}")]
    TooFewContours(usize),

    #[error("invalid smoothing parameters: {0}")]
    Smoothing(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point count mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("zero centered norm: scale undefined for {0}")]
    ZeroNorm(&'static str),

    #[error("empty sequence passed to DTW")]
    EmptySequence,

    #[error("kernel failure on pair ({a}, {b}): {source}")]
    Pair {
        a: String,
        b: String,
        #[source]
        source: Box<Error>,
    },

    #[error("column {column} has zero maximum; normalizer undefined")]
    ZeroColumn { column: usize },

    #[error("unknown preset {0:?}")]
    UnknownPreset(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("degenerate correlation: {0}")]
    DegenerateCorrelation(String),

    #[error("invalid cut: {0}")]
    InvalidCut(String),

    #[error("label id mismatch: {0}")]
    IdMismatch(String),

    #[error("warp magnitude {magnitude} exceeds maximum {max}")]
    MagnitudeTooLarge { magnitude: f64, max: f64 },

    #[error("no cached components at {}; run `sherd components` on this dataset first", .0.display())]
    MissingCache(PathBuf),

    #[error("cannot listen on {addr}: {message}")]
    Bind { addr: String, message: String },

    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        if source.kind() == std::io::ErrorKind::NotFound {
            return Error::MissingFile(path.into());
        }
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
