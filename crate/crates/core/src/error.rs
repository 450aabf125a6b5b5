use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the analysis, simulation and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The caller violated a usage contract (mismatched lengths, wrong dimension, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// A configuration field is missing or violates a constraint.
    #[error("invalid config field `{field}`: {constraint}")]
    Config { field: String, constraint: String },

    /// An internal self-consistency check failed; indicates a bug.
    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("linear solver did not converge after {iterations} iterations (residual {residual:.3e}, tolerance {tolerance:.1e})")]
    SolverDiverged {
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("non-finite value in field `{field}` at step {step} (node {node})")]
    NonFinite {
        step: usize,
        field: &'static str,
        node: usize,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, constraint: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            constraint: constraint.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
