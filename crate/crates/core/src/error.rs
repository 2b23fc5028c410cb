use thiserror::Error;

/// Errors raised across the normalization, estimate and orbit pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// A divisor that must be non-zero vanished (non-resonance hypothesis violated).
    #[error("resonance at index k = {k:?}: |<k, lambda>| = {magnitude:e}")]
    Resonance { k: Vec<i64>, magnitude: f64 },

    /// Birkhoff mode: a divisor too small to call either way.
    #[error("ambiguous resonance at index k = {k:?}: |<k, lambda>| = {magnitude:e} below tolerance {tolerance:e}")]
    AmbiguousResonance {
        k: Vec<i64>,
        magnitude: f64,
        tolerance: f64,
    },

    #[error("quadratic part is not diagonal: {0}")]
    NonDiagonalQuadratic(String),

    #[error("generating function of degree {0} would not terminate the Lie series")]
    LowDegreeGenerator(usize),

    #[error("structural check failed: {0}")]
    Structure(String),

    #[error("estimate failed: {0}")]
    Estimate(String),

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("degenerate perturbation: {0}")]
    Degenerate(String),

    #[error("trajectory left the guard radius at t = {time}")]
    Divergence { time: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
