use thiserror::Error;

/// Errors produced by the analysis library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    /// The matrix is numerically singular: `sigma_min <= 1e-12 * sigma_max`.
    #[error("numerically singular matrix (sigma_min = {sigma_min:e}, sigma_max = {sigma_max:e})")]
    Singular { sigma_min: f64, sigma_max: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    #[error("no channel with sigma_min >= {sigma_min} after {attempts} attempts")]
    SamplingExhausted { sigma_min: f64, attempts: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("bit block length {0} is not a whole number of QPSK symbols")]
    Framing(usize),

    #[error("formula denominator {denominator:e} is negative")]
    FormulaDomain { denominator: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
