//! Transformed distributions.
//!
//! `Pushforward` wraps a base distribution and a bijector. Sampling applies
//! the map to a base sample; density queries invert the map, query the base,
//! and apply the Gram-determinant volume correction while propagating the
//! tangent space. Because the pushed tangent is returned, pushforwards nest:
//! transforming a transformed distribution computes the same densities as
//! transforming once by the composition.

use rand::RngCore;

use crate::bijector::Bijector;
use crate::distribution::{Distribution, LocalMeasure, MEMBERSHIP_TOLERANCE};
use crate::error::{Error, Result};
use crate::tangent::{push_with_correction, TangentSpace};

/// The distribution of `map(x)` for `x ~ base`.
pub struct Pushforward<D, B> {
    base: D,
    map: B,
}

impl<D: Distribution, B: Bijector> Pushforward<D, B> {
    pub fn new(base: D, map: B) -> Result<Self> {
        if base.ambient_dim() != map.domain_dim() {
            return Err(Error::DimensionMismatch {
                expected: map.domain_dim(),
                got: base.ambient_dim(),
            });
        }
        Ok(Self { base, map })
    }

    pub fn base(&self) -> &D {
        &self.base
    }

    pub fn map(&self) -> &B {
        &self.map
    }

    /// Membership of `y` in the image of the map, tested by the
    /// inverse/forward round trip. No global knowledge of the image is
    /// available, so locality is all we get.
    fn invert_on_image(&self, y: &[f64]) -> Option<Vec<f64>> {
        let x = self.map.inverse(y).ok()?;
        let back = self.map.forward(&x).ok()?;
        let err: f64 = back
            .iter()
            .zip(y)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let norm_y: f64 = y.iter().map(|c| c * c).sum::<f64>().sqrt();
        if err <= MEMBERSHIP_TOLERANCE * (1.0 + norm_y) {
            Some(x)
        } else {
            None
        }
    }
}

impl<D: Distribution, B: Bijector> Distribution for Pushforward<D, B> {
    fn ambient_dim(&self) -> usize {
        self.map.codomain_dim()
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        let x = self.base.sample(rng);
        self.map
            .forward(&x)
            .expect("bijector must be defined on base samples")
    }

    fn local_measure(&self, y: &[f64]) -> Result<LocalMeasure> {
        if y.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                got: y.len(),
            });
        }
        let Some(x) = self.invert_on_image(y) else {
            // Not in the image: zero density, flagged. No tangent
            // information exists off the image, so the dimension reads 0.
            let mut lm =
                LocalMeasure::off_support(y.to_vec(), TangentSpace::zero(self.ambient_dim()));
            lm.off_image = true;
            return Ok(lm);
        };
        let lm = self.base.local_measure(&x)?;
        let (tangent, correction) = push_with_correction(&self.map, &x, &lm.tangent)?;
        if !lm.is_on_support() {
            return Ok(LocalMeasure::off_support(y.to_vec(), tangent));
        }
        Ok(LocalMeasure::new(y.to_vec(), lm.log_density + correction, tangent))
    }
}
