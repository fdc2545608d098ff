use thiserror::Error;

use crate::solvers::SolverTrace;

/// Errors produced by the geometry kernel, the projections and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    /// An exponential-map argument large enough to overflow `cosh`.
    #[error("out of numeric range: {0}")]
    Range(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("non-finite value: {message}")]
    Numeric {
        message: String,
        trace: Box<SolverTrace>,
    },

    #[error("line search exceeded {cap} backtracking trials at iteration {iteration}")]
    LineSearch {
        iteration: usize,
        cap: usize,
        trace: Box<SolverTrace>,
    },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    /// The partial solver trace, for errors raised mid-run.
    pub fn trace(&self) -> Option<&SolverTrace> {
        match self {
            Error::Numeric { trace, .. } | Error::LineSearch { trace, .. } => Some(trace),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
