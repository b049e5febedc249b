//! Error type shared across the crate.

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// File-system failure while reading or writing `path`.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed input file (bad CSV row, truncated raw stream, ...).
    #[error("parse error: {0}")]
    Parse(String),

    /// Violated precondition or invariant on otherwise well-formed data.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Numeric degeneracy: a quantity the algorithm divides by or fits
    /// through collapsed (zero variance, zero distance, empty histogram).
    #[error("numeric degeneracy: {0}")]
    Degenerate(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 for data errors, 3 for numeric
    /// degeneracy (usage errors exit 1 before reaching here).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Degenerate(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
