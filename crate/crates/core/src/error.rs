use thiserror::Error;

/// Errors raised anywhere in the quench pipeline.
#[derive(Debug, Error)]
pub enum QuenchError {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("dense diagonalization refused for L = {sites} (limit {limit})")]
    DenseTooLarge { sites: usize, limit: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("Lanczos did not converge within {krylov} Krylov vectors (worst residual {worst_residual:.3e})")]
    NotConverged {
        krylov: usize,
        worst_residual: f64,
        residuals: Vec<f64>,
    },

    #[error("sum rule not reached: deficit {deficit:.3e} > requested {requested:.3e}")]
    SumRuleNotReached { deficit: f64, requested: f64 },

    #[error("degenerate levels {first} and {second} (gap {gap:.3e})")]
    Degenerate { first: usize, second: usize, gap: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, QuenchError>;

impl QuenchError {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        QuenchError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
