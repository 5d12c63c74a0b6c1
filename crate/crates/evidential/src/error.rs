//! Crate-wide error type.

use crate::nig::ParamViolation;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// NIG hyperparameters violate one or more domain constraints. Every
    /// violated constraint is listed, not just the first.
    #[error("invalid NIG parameters: {}", format_violations(.0))]
    InvalidParams(Vec<ParamViolation>),

    /// An argument is outside the domain of the requested operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value is unusable.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Array/batch dimensions do not line up.
    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    Shape {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// An operation that needs data received none.
    #[error("empty input: {0}")]
    Empty(&'static str),

    /// Training produced a non-finite loss; reports where it happened so the
    /// run can be diagnosed instead of silently yielding NaN weights.
    #[error(
        "training aborted: non-finite loss at iteration {iteration} \
         (offending dataset rows: {rows:?})"
    )]
    NonFiniteLoss { iteration: usize, rows: Vec<usize> },

    /// A CSV cell failed to parse; names the exact location.
    #[error("{path}: row {row}, column {column}: {message}")]
    Parse {
        path: String,
        row: usize,
        column: usize,
        message: String,
    },

    /// File I/O failure, with the path that caused it.
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

fn format_violations(violations: &[ParamViolation]) -> String {
    violations
        .iter()
        .map(ParamViolation::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
