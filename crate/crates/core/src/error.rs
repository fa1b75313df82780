//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("input domain error: {0}")]
    InputDomain(String),

    /// Two objects that must live on the same grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A structural precondition failed (wrong pathway, malformed object).
    #[error("structural error: {0}")]
    Structural(String),

    /// A bracketing or root search failed; the message carries the scan report.
    #[error("search failure: {0}")]
    SearchFailure(String),

    /// The lambda-scaling equation could not be bracketed or solved.
    #[error("scaling failure: {0}")]
    ScalingFailure(String),

    /// The far field of the grid is contaminated; a larger r_max is needed.
    #[error("grid too small: {0}")]
    GridTooSmall(String),

    /// A resampling request fell outside the source grid support.
    #[error("extrapolation error: {0}")]
    Extrapolation(String),

    /// Kernel evaluation at coincident points.
    #[error("singularity: {0}")]
    Singularity(String),

    /// A far-field fit window is empty or unusable.
    #[error("window error: {0}")]
    Window(String),

    /// A value saturated the floating-point range.
    #[error("saturation: {0}")]
    Saturation(String),

    /// Eigensolver backend failure (nonzero LAPACK info, flagged pairs).
    #[error("eigensolver error: {0}")]
    Eigen(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
