use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("malformed encoding at byte {offset}: {reason}")]
    MalformedEncoding { offset: usize, reason: &'static str },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("weight overflow while {0}")]
    Overflow(&'static str),

    #[error("infeasible instance: {0}")]
    Infeasible(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("missing (instance, algorithm) pairs: {0:?}")]
    MissingRuns(Vec<(String, String)>),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}
