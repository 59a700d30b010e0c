//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Index or size outside its valid range.
    #[error("range error: {0}")]
    Range(String),

    /// Words of different lengths were mixed.
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// An exhaustive mode was asked to exceed its configured cap.
    #[error("resource cap exceeded: {0}")]
    Resource(String),

    /// Invalid experiment or CLI configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Malformed codebook file.
    #[error("parse error at line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 for config/domain problems, 3 for
    /// resource-cap violations, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Resource(_) => 3,
            Error::Domain(_)
            | Error::Range(_)
            | Error::LengthMismatch { .. }
            | Error::Config(_)
            | Error::Format { .. } => 2,
            Error::Io(_) => 1,
        }
    }
}
