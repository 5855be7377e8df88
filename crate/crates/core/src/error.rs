use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate domain: rejection acceptance rate {rate:.3e} after {trials} trials")]
    DegenerateDomain { rate: f64, trials: u64 },

    #[error("scheme `{scheme}` does not support {what}")]
    UnsupportedScheme { scheme: &'static str, what: &'static str },

    #[error("integrand value {value} exceeds cap {cap} at point {point:?}")]
    UnboundedIntegrand { point: Vec<f64>, value: f64, cap: f64 },

    #[error("singular kernel: x and y coincide")]
    SingularKernel,

    #[error("no node has a full interior stencil of width {stencil_h}")]
    GeometryTooThin { stencil_h: f64 },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
