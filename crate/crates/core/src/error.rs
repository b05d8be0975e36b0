use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mode space: {0}")]
    InvalidSpace(String),

    #[error("dimension {dim} exceeds the configured budget of {budget}")]
    DimensionBudget { dim: usize, budget: usize },

    #[error("mode {mode} out of range for a {n_modes}-mode space")]
    ModeOutOfRange { mode: usize, n_modes: usize },

    #[error("operators live on different mode spaces")]
    SpaceMismatch,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("generator is not anti-Hermitian (defect {defect:.3e})")]
    NotAntiHermitian { defect: f64 },

    #[error("parameter point belongs to {found}, model expects {expected}")]
    ModelMismatch { expected: String, found: String },

    #[error("invalid coordinate index {index} (model has {n_real} real coordinates)")]
    InvalidCoordinate { index: usize, n_real: usize },

    #[error("unknown coordinate name `{name}` for model {model}")]
    UnknownCoordinate { name: String, model: String },

    #[error("degenerate eigenspace has dimension {found}, model requires {expected}")]
    KernelDimension { found: usize, expected: usize },

    #[error("curvature needs two distinct coordinates, got {0} twice")]
    DegeneratePair(usize),

    #[error("loop is not closed: end point misses the start by {gap:.3e}")]
    OpenLoop { gap: f64 },

    #[error("loop is discontinuous between segments {segment} and {next}: gap {gap:.3e}")]
    Discontinuous { segment: usize, next: usize, gap: f64 },

    #[error("parameter magnitude {magnitude:.3} exceeds the limit {limit:.3}")]
    ParameterBudget { magnitude: f64, limit: f64 },

    #[error("accuracy check failed: {0}")]
    Accuracy(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DimensionBudget { .. } | Error::ParameterBudget { .. } => 4,
            Error::Accuracy(_) => 3,
            _ => 2,
        }
    }
}
