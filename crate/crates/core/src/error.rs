use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("nodes out of order: expected s <= u <= t, got ({s}, {u}, {t})")]
    Ordering { s: usize, u: usize, t: usize },

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("{what}: quadrature did not reach tolerance {tol:e} (residual {residual:e})")]
    Tolerance { what: &'static str, residual: f64, tol: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("germ is not regular enough to sew: inter-level ratio {ratio:.4} >= 1")]
    Regularity { ratio: f64 },

    #[error("solution left the finite range at step {step}")]
    Overflow { step: usize },

    #[error("grid step {step:e} does not resolve the telegraph scale (need <= {required:e})")]
    Resolution { step: f64, required: f64 },

    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
