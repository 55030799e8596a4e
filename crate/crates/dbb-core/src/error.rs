use thiserror::Error;

/// Errors produced by the solver stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})")]
    EigNotConverged { sweeps: usize, residual: f64 },

    #[error("matrix is not positive definite (lambda_min = {lambda_min:e})")]
    NotPositiveDefinite { lambda_min: f64 },

    #[error("graph is not connected")]
    Disconnected,

    #[error("failed to generate a connected graph after {attempts} attempts")]
    GraphGeneration { attempts: usize },

    #[error("sinkhorn normalization did not converge after {sweeps} sweeps (worst sum deviation {deviation:e})")]
    SinkhornNotConverged { sweeps: usize, deviation: f64 },

    #[error("objective is not strongly convex (mu = {mu:e})")]
    NotStronglyConvex { mu: f64 },

    #[error("iterates diverged at round {round}{}", agent.map(|a| format!(" (agent {a})")).unwrap_or_default())]
    Divergence { round: usize, agent: Option<usize> },

    #[error("invalid mixing spectrum: lambda = {lambda}")]
    InvalidSpectrum { lambda: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
