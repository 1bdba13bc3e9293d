use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported mesh format: {0}")]
    UnsupportedFormat(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("degenerate face {0} (area below 1e-12)")]
    DegenerateFace(usize),

    #[error("degenerate edge {0} (length below 1e-12)")]
    DegenerateEdge(usize),

    #[error("no pixel exceeds the base threshold")]
    EmptyImage,

    #[error("matrix has rank < 3 and cannot be projected onto SO(3)")]
    SingularInput,

    #[error("varifold has no non-degenerate support")]
    EmptyVarifold,

    #[error("invalid varifold: {0}")]
    InvalidVarifold(String),

    #[error("non-finite value encountered at support {0}")]
    NonFiniteValue(usize),

    #[error("measure is not a sub-measure of the reference")]
    NotSubmeasure,

    #[error("measures do not have unit mass (got {0} and {1})")]
    MassMismatch(f64, f64),

    #[error("transport problem too large: {0} atoms (limit 256)")]
    TooLarge(usize),

    #[error("invalid layer dimensions: {0}")]
    BadDims(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("length mismatch: {0} predictions vs {1} labels")]
    LengthMismatch(usize, usize),

    #[error("class label {label} out of range for {classes} classes")]
    BadLabel { label: usize, classes: usize },

    #[error("label kind mismatch: {0}")]
    KindMismatch(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

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

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
