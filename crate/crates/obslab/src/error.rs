use thiserror::Error;

/// Crate-wide error type. Variants carry enough context to name the
/// offending quantity in user-facing messages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error(
        "region exceeds the Nyquist band: outer radius {requested:.6} \
         must stay below (2π/L)·(N/2) = {limit:.6}"
    )]
    NyquistExceeded { requested: f64, limit: f64 },

    #[error("region selects no lattice points: {0}")]
    EmptyMask(String),

    #[error("geometry: {0}")]
    Geometry(String),

    #[error("damping must be nonnegative, found γ = {value:.6e} at x = {location:?}")]
    NegativeDamping { value: f64, location: Vec<f64> },

    #[error("bound requires γ ∈ (0, 1), got {gamma}")]
    GammaOutOfRange { gamma: f64 },

    #[error(
        "eigensolver did not converge: residual {residual:.3e} after {iterations} \
         iterations (tolerance {tolerance:.3e})"
    )]
    NonConvergence {
        residual: f64,
        iterations: usize,
        tolerance: f64,
    },

    #[error("wave evolution: {0}")]
    Wave(String),

    #[error("decay fit: {0}")]
    Fit(String),

    #[error("step budget exceeded: horizon/dt needs {needed} steps, budget is {budget}")]
    StepBudget { needed: u64, budget: u64 },

    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code for the CLI: 1 for numerical non-convergence,
    /// 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
