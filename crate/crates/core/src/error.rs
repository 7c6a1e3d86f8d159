use std::path::PathBuf;

use crate::conic::SolveStatus;

/// Unified error type for the crate.
///
/// Infeasibility of a *subproblem* that an algorithm probes on purpose (a
/// candidate support during bisection, a branch-and-bound node) is not an
/// error; it only becomes one when an operation is asked to produce a
/// solution that cannot exist, e.g. initializing from an instance whose
/// full-cooperation problem is already infeasible.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("conic solver failed with status {0:?}")]
    SolverFailure(SolveStatus),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("config parse error: {0}")]
    ConfigParse(String),
}

impl Error {
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Infeasible(_))
    }
}
