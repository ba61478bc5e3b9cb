use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by loaders, transforms, learners and model IO.
///
/// Variants are grouped so a caller (the CLI) can map them onto distinct
/// exit-code classes: IO, file/schema, configuration, and numeric abort.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: bad magic number: expected 0x{expected:08x}, found 0x{found:08x}")]
    BadMagic {
        path: PathBuf,
        expected: u32,
        found: u32,
    },

    #[error("{path}: truncated file: {detail}")]
    Truncated { path: PathBuf, detail: String },

    #[error("image/label count mismatch: {images} images vs {labels} labels")]
    CountMismatch { images: usize, labels: usize },

    #[error("{path}:{line}: {detail}")]
    Parse {
        path: PathBuf,
        line: usize,
        detail: String,
    },

    #[error("format error in {path}: {detail}")]
    Format { path: PathBuf, detail: String },

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("no base learner with positive edge at iteration {iteration}")]
    NonPositiveEdge { iteration: usize },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Exit-code class for the CLI: 2 usage, 3 io, 4 file/schema, 5 numeric.
    pub fn exit_class(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) => 2,
            Error::Io { .. } => 3,
            Error::BadMagic { .. }
            | Error::Truncated { .. }
            | Error::CountMismatch { .. }
            | Error::Parse { .. }
            | Error::Format { .. }
            | Error::Schema(_)
            | Error::DimensionMismatch { .. } => 4,
            Error::NonPositiveEdge { .. } => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
