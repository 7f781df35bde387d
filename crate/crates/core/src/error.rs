//! Crate-wide error type and exit-code mapping.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a documented precondition or invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// A raw annotation record could not be parsed. Carries the comment id
    /// so batch failures are actionable.
    #[error("parse error in comment '{comment_id}': {message}")]
    Parse { comment_id: String, message: String },

    /// Configuration is malformed or inconsistent with a loaded artifact.
    #[error("config error: {0}")]
    Config(String),

    /// Tokenization or encoder forward-pass failure.
    #[error("encoding error: {0}")]
    Encoding(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn encoding(msg: impl Into<String>) -> Self {
        Error::Encoding(msg.into())
    }

    pub fn parse(comment_id: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Parse {
            comment_id: comment_id.into(),
            message: msg.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 for validation-class errors, 2 for i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
