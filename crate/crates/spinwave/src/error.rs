use thiserror::Error;

/// Library-level error type. Variants mirror the failure modes of the
/// individual model stages so callers can match on them.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error(
        "quadrature failed to converge: estimated error {estimate:.3e} \
         exceeds tolerance {tolerance:.3e} after {panels} panels"
    )]
    QuadratureFailure {
        estimate: f64,
        tolerance: f64,
        panels: usize,
    },

    #[error("excitation-count mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("coordinate {value} outside the medium [0, {length}]")]
    OutOfDomain { value: f64, length: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error(
        "integration step too coarse: step-halving residual {residual:.3e} \
         exceeds {tolerance:.3e}"
    )]
    StepTooCoarse { residual: f64, tolerance: f64 },

    #[error("excitation index {k} outside 1..={n_g}")]
    IndexOutOfRange { k: usize, n_g: usize },

    #[error("io failure: {0}")]
    Io(String),

    #[error("serialization failure: {0}")]
    Serialization(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Serialization(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
