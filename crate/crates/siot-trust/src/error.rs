//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by trace ingestion, feature extraction, learning, and
/// simulation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A CSV row failed to parse. `line` is 1-based and counts header and
    /// comment lines, so it matches what an editor shows.
    #[error("{file}: parse error at line {line}: {message}")]
    Parse {
        file: String,
        line: u64,
        message: String,
    },

    /// A row referenced a node id that was never declared in the node list.
    #[error("{file}: line {line}: unknown node id {id}")]
    UnknownNode { file: String, line: u64, id: u64 },

    /// Structural validation failed (self-loops, bad flags, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A feature is undefined for the given pair (e.g. reward with no
    /// interactions).
    #[error("undefined feature for pair ({trustor}, {trustee}): {reason}")]
    UndefinedFeature {
        trustor: u32,
        trustee: u32,
        reason: String,
    },

    /// The requested computation cannot be carried out on this input
    /// (e.g. more clusters than distinct samples).
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Not enough samples to train a model.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Invalid configuration value.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An internal contract was violated; callers hitting this found a bug.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("model document error: {0}")]
    ModelFormat(String),
}

impl Error {
    /// Process exit code the CLI maps this error to: 1 for user/input
    /// errors, 2 for internal invariant violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Contract(_) => 2,
            _ => 1,
        }
    }

    /// Attach the offending path to an I/O error.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
