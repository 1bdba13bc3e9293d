use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: bad IDX magic {found:#010x}, expected {expected:#010x}")]
    BadMagic { path: PathBuf, expected: u32, found: u32 },

    #[error("{path}: file ends after {got} bytes, header promises {expected}")]
    TruncatedFile { path: PathBuf, expected: usize, got: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] svarm::Error),
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 for usage errors, 2 for everything data-related.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            _ => 2,
        }
    }

    /// Short machine-readable name printed alongside the message.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::BadMagic { .. } => "bad_magic",
            CliError::TruncatedFile { .. } => "truncated_file",
            CliError::DimensionMismatch(_) => "dimension_mismatch",
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Manifest { .. } => "manifest",
            CliError::Core(e) => match e {
                svarm::Error::Parse { .. } => "parse",
                svarm::Error::UnsupportedFormat(_) => "unsupported_format",
                svarm::Error::Schema(_) => "schema",
                svarm::Error::Config(_) => "config",
                svarm::Error::Io { .. } => "io",
                svarm::Error::EmptyImage => "empty_image",
                svarm::Error::KindMismatch(_) => "kind_mismatch",
                svarm::Error::ShapeMismatch(_) | svarm::Error::BadDims(_) => "shape_mismatch",
                _ => "data",
            },
        }
    }
}
