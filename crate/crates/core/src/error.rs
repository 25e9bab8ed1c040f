use thiserror::Error;

/// Errors produced by the spectral routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("evaluation failed at x = {x}: {reason}")]
    Evaluation { x: f64, reason: String },

    #[error("potential does not confine: q stays below {target} for x <= {limit}")]
    NotConfining { target: f64, limit: f64 },

    #[error("no turning point below {limit} for lambda = {lambda}")]
    NoTurningPoint { lambda: f64, limit: f64 },

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("factorization breakdown at pivot {index} after {retries} shift retries")]
    FactorizationBreakdown { index: usize, retries: usize },

    #[error("root solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("infinite volume: {0}")]
    InfiniteVolume(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("cannot parse preset `{spec}`: {reason}")]
    Parse { spec: String, reason: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
