use thiserror::Error;

/// Errors raised by the normal-form toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("smoothness weight must be nonnegative, got {0}")]
    NegativeSmoothness(f64),

    #[error("series flagged real violates Hermitian symmetry at mode {mode:?}")]
    NotHermitian { mode: Vec<i32> },

    #[error("mode {mode:?} exceeds truncation radius {max_mode}")]
    ModeOutOfRange { mode: Vec<i32>, max_mode: usize },

    #[error("right-hand side has nonzero mean {mean:e} (tolerance {tolerance:e})")]
    NonZeroMean { mean: f64, tolerance: f64 },

    #[error("mode {mode:?} is effectively resonant: |<omega,k>| = {divisor:e}")]
    ResonantMode { mode: Vec<i32>, divisor: f64 },

    #[error("frequency vector is resonant at {mode:?} within horizon {horizon}")]
    ResonantFrequency { mode: Vec<i32>, horizon: usize },

    #[error("Diophantine condition fails at {mode:?}: |<omega,k>| = {divisor:e} < {bound:e}")]
    DiophantineViolation {
        mode: Vec<i32>,
        divisor: f64,
        bound: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("multi-index {alpha:?} does not have degree {degree}")]
    DegreeMismatch { alpha: Vec<u32>, degree: usize },

    #[error("missing data: {0}")]
    MissingData(String),

    #[error("iteration did not converge after {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("action {norm:e} outside domain radius {radius:e}")]
    DomainExceeded { norm: f64, radius: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("malformed serialized data: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
