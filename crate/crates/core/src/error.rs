use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("shape error: expected a square matrix, got {rows}x{cols}")]
    Shape { rows: usize, cols: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("singular block: {0}")]
    SingularBlock(String),

    #[error("truncation headroom violated: {0}")]
    Headroom(String),

    #[error("step size too coarse: {0}")]
    StepSize(String),

    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    #[error("Kraus sum did not converge: {0}")]
    Completeness(String),

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    #[error("no equilibrium: {0}")]
    NoEquilibrium(String),
}

pub type Result<T> = std::result::Result<T, Error>;
