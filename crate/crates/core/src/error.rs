use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("format error in {path}: key `{key}`: {msg}")]
    Format {
        path: PathBuf,
        key: String,
        msg: String,
    },
    #[error("raw data {path} holds {actual} bytes, header declares {expected}")]
    Truncated {
        path: PathBuf,
        expected: usize,
        actual: usize,
    },
    #[error("label {value} at pixel {index} of {path} is outside 0..=3")]
    InvalidLabel {
        path: PathBuf,
        value: u8,
        index: usize,
    },
    #[error("invalid mask: {0}")]
    InvalidMask(String),
    #[error("manifest {path} line {line}: {msg}")]
    Manifest {
        path: PathBuf,
        line: u64,
        msg: String,
    },
    #[error("{path} line {line}: {msg}")]
    Table {
        path: PathBuf,
        line: u64,
        msg: String,
    },
    #[error("duplicate case {0} in manifest")]
    DuplicateCase(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("degenerate region: {pixels} foreground pixel(s), at least 3 required")]
    DegenerateRegion { pixels: usize },
    #[error("degenerate contour: {0}")]
    DegenerateContour(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("length mismatch: {left} vs {right} values")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("correlation undefined for a constant series")]
    UndefinedCorrelation,
    #[error("case keys do not match; unmatched: {}", .0.join(", "))]
    KeyMismatch(Vec<String>),
    #[error("missing reference for case {0}")]
    MissingReference(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
