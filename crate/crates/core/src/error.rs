use thiserror::Error;

/// Errors produced anywhere in the pipeline.
///
/// The variants line up with the three ways a request can fail: the caller
/// handed us something malformed, the problem has no solution (not
/// stabilizable, rank condition violated), or floating-point iteration broke
/// down.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("numerical failure: {message} (residual {residual:e})")]
    Numerical { message: String, residual: f64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn no_solution(msg: impl Into<String>) -> Self {
        Error::NoSolution(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>, residual: f64) -> Self {
        Error::Numerical {
            message: msg.into(),
            residual,
        }
    }

    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::Io { .. } | Error::Parse { .. } => 2,
            Error::NoSolution(_) => 3,
            Error::Numerical { .. } => 4,
        }
    }
}
