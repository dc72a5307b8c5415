//! Measure-aware probability densities.
//!
//! Probability densities are only meaningful relative to a base measure, and
//! the conventional `1/|det J|` change-of-variables rule silently assumes
//! that base is Lebesgue measure on the full ambient space. This crate makes
//! the base measure explicit: every density is taken with respect to the
//! Hausdorff measure of the support's dimension, every distribution query
//! returns the local tangent space of the support alongside the density, and
//! bijective transformations update densities with the Gram-determinant
//! volume correction, which reduces to `1/|det J|` exactly when the
//! conventional rule is valid.
//!
//! The pieces:
//!
//! - [`tangent`]: tangent-space representations and the volume correction,
//!   with fast paths for discrete, full-support, and axis-aligned cases.
//! - [`weight`]: comparison and combination of densities that live at
//!   different support dimensions (lower dimension dominates).
//! - [`bijector`]: invertible smooth maps with analytic or finite-difference
//!   directional derivatives.
//! - [`distribution`]: the sampler + local-measure contract and concrete
//!   distributions over every support class (full, manifold, discrete,
//!   structured-sparse, mixed-dimension mixtures).
//! - [`pushforward`]: transformed distributions — sample through the map,
//!   evaluate densities through the correction.
//! - [`inference`]: measure-aware SMC resampling and Metropolis–Hastings.
//! - [`quadrature`]: Gauss–Legendre rules used by the validation harness.
//!
//! The `parallel` feature (on by default) runs the embarrassingly parallel
//! loops — Monte Carlo estimates, quadrature sums, batch evaluation — on a
//! rayon pool. Results are bit-identical with the feature off: work is
//! chunked the same way in both builds and reduced in chunk order.

pub mod bijector;
pub mod distribution;
pub mod error;
pub mod inference;
pub mod par;
pub mod pushforward;
pub mod quadrature;
pub mod tangent;
pub mod weight;

pub use bijector::Bijector;
pub use distribution::{Distribution, LocalMeasure};
pub use error::{Error, Result};
pub use pushforward::Pushforward;
pub use tangent::TangentSpace;
pub use weight::DimensionedWeight;
