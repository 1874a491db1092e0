use thiserror::Error;

/// Errors raised by the solver and its post-processing.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("bandwidth overflow: mode ell={ell} exceeds the product-safe limit {limit}")]
    BandwidthOverflow { ell: usize, limit: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid initial data: {0}")]
    InvalidData(String),

    #[error("invalid report plan: {0}")]
    InvalidPlan(String),

    #[error("divergence at u={u}, v={v} (ell={ell}, m={m}): |value|={value:e}")]
    Divergence {
        u: f64,
        v: f64,
        ell: usize,
        m: i64,
        value: f64,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate fit window: {0}")]
    DegenerateWindow(String),

    #[error("mode ell={ell} not excited (|C_ell| = {magnitude:e})")]
    ModeNotExcited { ell: usize, magnitude: f64 },

    #[error("convergence study: {0}")]
    Convergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
