//! Error type shared across the crate.

use thiserror::Error;

/// Errors raised by tangent propagation, bijector evaluation, distribution
/// queries, and measure-aware inference.
#[derive(Debug, Error)]
pub enum Error {
    /// A tangent basis is numerically rank-deficient: the square root of its
    /// Gram determinant fell below the scale-aware tolerance.
    #[error("degenerate tangent basis: {0}")]
    DegenerateBasis(String),

    /// A directional derivative evaluated to a non-finite value.
    #[error("non-finite directional derivative: {0}")]
    NonFiniteDerivative(String),

    /// A bijector could not be constructed (zero scale, singular matrix, ...).
    #[error("invalid bijector: {0}")]
    InvalidBijector(String),

    /// A distribution could not be constructed (bad weights, empty box, ...).
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// Vector or matrix dimensions do not line up.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A point fell outside the domain of a map (e.g. log of a nonpositive
    /// coordinate).
    #[error("domain error: {0}")]
    DomainError(String),

    /// Two minimal-dimension mixture components are both supported at the
    /// query point but their tangent spaces span different subspaces.
    #[error("ambiguous tangent: minimal-dimension components disagree at the query point")]
    AmbiguousTangent,

    /// Resampling is undefined for the given particle set.
    #[error("resampling undefined: {0}")]
    UndefinedResampling(String),

    /// The dimensioned acceptance comparison is undefined for this pair of
    /// target evaluations.
    #[error("metropolis-hastings comparison undefined: {0}")]
    UndefinedComparison(String),
}

pub type Result<T> = std::result::Result<T, Error>;
