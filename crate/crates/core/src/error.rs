use thiserror::Error;

/// Errors produced by the numerical library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    /// Phase-space density queried exactly at a one-dimensional barrier top,
    /// where it diverges logarithmically.
    #[error("logarithmic singularity of the phase-space density at E = {energy}")]
    LogSingularity { energy: f64 },

    #[error("spectrum not converged after reaching the basis cap {cap}; worst level error {worst_error:e}")]
    Unconverged {
        cap: usize,
        worst_error: f64,
        errors: Vec<f64>,
    },

    #[error("unconverged spectrum at lambda = {lambda}: {source}")]
    UnconvergedAt {
        lambda: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("parity undefined: {0}")]
    ParityUndefined(String),

    #[error("single-well potential: {0}")]
    SingleWell(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
