//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by construction, validation, and evaluation.
#[derive(Debug, Clone, Error)]
#[non_exhaustive]
pub enum Error {
    /// Matrix or interferometer dimension is zero.
    #[error("dimension must be at least 1")]
    InvalidDimension,

    /// A scalar parameter is out of its allowed range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Port lists are duplicated, out of range, or of the wrong length.
    #[error("invalid port selection: {0}")]
    InvalidSelection(String),

    /// Matrix order exceeds a kernel's hard cap.
    #[error("order {order} exceeds the {kernel} kernel cap of {max}")]
    SizeLimit {
        kernel: &'static str,
        order: usize,
        max: usize,
    },

    /// Parallel lists (sources, times, angles, windows) disagree in length.
    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    /// Quadrature specification violates its bounds, or the requested
    /// tensor grid is too large to evaluate.
    #[error("invalid quadrature: {0}")]
    InvalidQuadrature(String),

    /// Enumerating the outcome space would exceed the record guard.
    #[error(
        "outcome space of {records} records exceeds the guard of {max}; \
         use a coarser time grid or fewer detectors"
    )]
    OutcomeOverflow { records: u128, max: u64 },

    /// Sampling is impossible because every outcome has zero weight.
    #[error("cannot sample: all outcome weights are zero")]
    AllZeroWeights,

    /// A matrix supposed to be unitary failed validation.
    #[error("matrix is not unitary: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    NotUnitary { residual: f64, tol: f64 },

    /// A computed or supplied value is NaN or infinite.
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, Error>;
