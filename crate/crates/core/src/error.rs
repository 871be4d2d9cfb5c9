use thiserror::Error;

/// Errors produced by the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The state norm vanished; either the initial state has no overlap with
    /// the retained states or the step is too large for the potential.
    #[error("state norm collapsed to {norm:e}")]
    ZeroNorm { norm: f64 },

    #[error("non-finite energy at step {step}: {detail}")]
    NonFinite { step: usize, detail: String },

    #[error("coordinate {value} is not a grid point of axis {axis}; nearest grid points: {nearest:?}")]
    OffGrid {
        axis: usize,
        value: f64,
        nearest: Vec<f64>,
    },

    #[error("dense oracle dimension {dim} exceeds the cap of {cap}")]
    OracleTooLarge { dim: usize, cap: usize },

    #[error("grid has {elements} elements, above the configured cap of {cap}")]
    TooManyElements { elements: usize, cap: usize },

    #[error("malformed wavefunction dump: {0}")]
    Format(String),

    #[error("configuration error:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse error category, also used as the CLI exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Numeric,
    Io,
}

impl ErrorCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::Config => "config",
            ErrorCategory::Numeric => "numeric",
            ErrorCategory::Io => "io",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Config => 2,
            ErrorCategory::Numeric => 3,
            ErrorCategory::Io => 4,
        }
    }
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config(_) | Error::InvalidArgument(_) | Error::TooManyElements { .. } => {
                ErrorCategory::Config
            }
            Error::Io(_) | Error::Format(_) => ErrorCategory::Io,
            Error::GridMismatch(_)
            | Error::ZeroNorm { .. }
            | Error::NonFinite { .. }
            | Error::OffGrid { .. }
            | Error::OracleTooLarge { .. } => ErrorCategory::Numeric,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
