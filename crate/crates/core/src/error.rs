use thiserror::Error;

/// Errors produced anywhere in the solver stack.
#[derive(Debug, Error)]
pub enum FsiError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mesh mismatch: {0}")]
    MeshMismatch(String),

    #[error("singular reference-to-physical map (triangle {0})")]
    SingularMap(usize),

    #[error("singular matrix: pivot {pivot} has magnitude {value:e}")]
    SingularMatrix { pivot: usize, value: f64 },

    #[error(
        "no convergence after {iterations} iterations (relative residual {relative_residual:e})"
    )]
    NoConvergence {
        iterations: usize,
        relative_residual: f64,
        best: Vec<f64>,
    },

    #[error("dimension {dim} exceeds the dense cap {cap}")]
    Size { dim: usize, cap: usize },

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl FsiError {
    /// Short machine-readable tag, used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            FsiError::InvalidArgument(_) => "invalid-argument",
            FsiError::MeshMismatch(_) => "mesh-mismatch",
            FsiError::SingularMap(_) => "singular-map",
            FsiError::SingularMatrix { .. } => "singular-matrix",
            FsiError::NoConvergence { .. } => "no-convergence",
            FsiError::Size { .. } => "size",
            FsiError::Config { .. } => "config",
            FsiError::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, FsiError>;

pub(crate) fn invalid(msg: impl Into<String>) -> FsiError {
    FsiError::InvalidArgument(msg.into())
}
