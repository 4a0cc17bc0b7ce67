use thiserror::Error;

/// Errors raised by channel synthesis, the phase optimizers and the harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("geometry mismatch: expected {expected} array")]
    GeometryMismatch { expected: &'static str },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("degenerate channel: {0}")]
    DegenerateChannel(&'static str),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("index {index} out of range for {len} elements")]
    IndexOutOfRange { index: usize, len: usize },

    #[error(
        "SDP solver did not converge after {iterations} iterations \
         (primal {primal:.3e}, dual {dual:.3e}, gap {gap:.3e})"
    )]
    SolverFailure {
        iterations: usize,
        primal: f64,
        dual: f64,
        gap: f64,
    },

    #[error(
        "exhaustive search over {candidates} candidates exceeds the cap of {cap}; \
         reduce the number of elements or phase levels"
    )]
    EnumerationCap { candidates: u128, cap: u64 },

    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },

    #[error("unsupported problem: {0}")]
    Unsupported(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
