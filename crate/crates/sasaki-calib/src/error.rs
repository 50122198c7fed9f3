//! Crate-wide error type.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Matrix or vector shapes are incompatible with the operation.
    #[error("dimension error: {0}")]
    Dimension(String),
    /// An argument lies outside the accepted range.
    #[error("argument error: {0}")]
    Argument(String),
    /// A point or parameter lies outside the domain of a chart or formula.
    #[error("domain error: {0}")]
    Domain(String),
    /// A formula dividing by `sin r` was evaluated too close to a pole.
    #[error("singularity: {0}")]
    Singularity(String),
    /// A construction that needs distinct eigenvalues or independent vectors
    /// received degenerate data.
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// Normalised linear interpolation between antipodal vectors.
    #[error("antipodal input: chord norm {0:e}")]
    Antipodal(f64),
    /// A vector that must stay above a floor fell below it.
    #[error("nonvanishing violation: {quantity} = {value:e} < floor {floor:e} at {location:?}")]
    NonvanishingViolation {
        /// Name of the monitored quantity.
        quantity: String,
        /// Observed value.
        value: f64,
        /// Required floor.
        floor: f64,
        /// Ambient coordinates of the offending point.
        location: Vec<f64>,
    },
    /// An iterative routine did not reach its tolerance.
    #[error("tolerance not reached: {0}")]
    Tolerance(String),
    /// A computation produced NaN or an infinity.
    #[error("non-finite value: {0}")]
    NonFinite(String),
}
