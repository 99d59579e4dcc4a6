use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("matrix is not positive definite (pivot {index} = {pivot:e})")]
    Factorization { index: usize, pivot: f64 },
    #[error("invalid search space: {0}")]
    InvalidSpace(String),
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("degenerate marginal in dimension {dim}: std = {std:e}")]
    DegenerateMarginal { dim: usize, std: f64 },
    #[error("margin correction infeasible: tail redistribution denominator = {denominator:e}")]
    CorrectionInfeasible { denominator: f64 },
    #[error("protocol error: {0}")]
    Protocol(String),
}
