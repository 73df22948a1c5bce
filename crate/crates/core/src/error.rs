use std::io;

use thiserror::Error;

/// Failures reported by a remote annealer client.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum RemoteError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("remote did not answer within {0:?}")]
    Timeout(std::time::Duration),
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("problem of size {n} exceeds remote capacity{}", .capacity.map(|c| format!(" {c}")).unwrap_or_default())]
    CapacityExceeded { n: usize, capacity: Option<usize> },
}

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition (dimension mismatch, bad range, ...).
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("integration diverged at step {step}")]
    Divergence { step: usize },
    #[error("problem size {n} exceeds the capacity {max} of {what}")]
    Capacity { what: &'static str, n: usize, max: usize },
    #[error(transparent)]
    Remote(#[from] RemoteError),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! contract {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::Error::Contract(format!($($arg)+)));
        }
    };
}
pub(crate) use contract;
