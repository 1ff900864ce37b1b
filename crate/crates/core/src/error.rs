use thiserror::Error;

use crate::fit::FitResult;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// Type C with γ > 0 drove the altered zero probability to zero.
    #[error("zero deflation infeasible: 1 - e^gamma (1 - pi0) <= 0 (gamma = {gamma}, pi0 = {pi0})")]
    DeflationInfeasible { gamma: f64, pi0: f64 },

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error at row {row}, column '{column}': {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("data error: {0}")]
    Data(String),

    #[error("missing column '{0}'")]
    MissingColumn(String),

    #[error("singular hessian: {0}")]
    SingularHessian(String),

    /// The optimizer stopped without meeting the gradient test; carries the best point found.
    #[error("fit did not converge after {} iterations (loglik {})", .0.iterations, .0.loglik_value)]
    NotConverged(Box<FitResult>),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
