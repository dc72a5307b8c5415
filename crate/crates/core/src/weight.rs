//! Dimensioned-weight algebra.
//!
//! A density value only means something together with the Hausdorff dimension
//! of the base measure it is taken against. This module pairs the two into
//! [`DimensionedWeight`] and implements the three operations inference needs:
//! [`ratio`], [`sum`], and [`product`]. Lower dimension dominates: a point
//! mass is an infinitely larger heap of probability than any finite density
//! on a curve, which in turn dwarfs any finite density on a surface.
//!
//! All weights are carried in log scale. `-inf` encodes weight zero and
//! `+inf` encodes an infinite density; both occur naturally (off-support
//! points, atoms viewed against too coarse a base measure) and the case
//! tables branch on them explicitly.

/// A nonnegative extended-real weight together with the Hausdorff dimension
/// of the base measure it is a density against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionedWeight {
    dim: usize,
    log_weight: f64,
}

impl DimensionedWeight {
    /// New weight from a log-scale value. `-inf` and `+inf` are legal;
    /// NaN is not.
    pub fn new(dim: usize, log_weight: f64) -> Self {
        assert!(!log_weight.is_nan(), "dimensioned weight must not be NaN");
        Self { dim, log_weight }
    }

    /// New weight from a linear-scale value.
    pub fn from_weight(dim: usize, weight: f64) -> Self {
        assert!(weight >= 0.0, "weight must be nonnegative");
        Self::new(dim, weight.ln())
    }

    /// The zero weight at the given dimension.
    pub fn zero(dim: usize) -> Self {
        Self::new(dim, f64::NEG_INFINITY)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn log_weight(&self) -> f64 {
        self.log_weight
    }

    pub fn weight(&self) -> f64 {
        self.log_weight.exp()
    }

    pub fn is_zero(&self) -> bool {
        self.log_weight == f64::NEG_INFINITY
    }

    pub fn is_infinite(&self) -> bool {
        self.log_weight == f64::INFINITY
    }

    pub fn is_finite(&self) -> bool {
        self.log_weight < f64::INFINITY
    }

    /// Strictly positive (possibly infinite) weight.
    pub fn is_positive(&self) -> bool {
        self.log_weight > f64::NEG_INFINITY
    }
}

/// Outcome of comparing two dimensioned weights.
///
/// `Undefined` is a value, not an error: the four numbers (two dimensions,
/// two weights) do not determine the underlying limit, so callers must decide
/// what to do. The inference algorithms treat it as fatal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedRatio {
    /// A finite positive ratio, stored as its logarithm.
    Finite(f64),
    Zero,
    Infinite,
    Undefined,
}

/// Limiting ratio of the probability masses in shrinking balls around `y`
/// and `x`. Equal dimensions reduce to the ordinary density ratio; across
/// dimensions the lower-dimensional weight dominates.
pub fn ratio(y: DimensionedWeight, x: DimensionedWeight) -> ExtendedRatio {
    use std::cmp::Ordering;
    match y.dim.cmp(&x.dim) {
        Ordering::Equal => {
            let (ly, lx) = (y.log_weight, x.log_weight);
            if ly == f64::NEG_INFINITY && lx == f64::NEG_INFINITY {
                ExtendedRatio::Undefined // 0 / 0
            } else if ly == f64::INFINITY && lx == f64::INFINITY {
                ExtendedRatio::Undefined // inf / inf
            } else if ly == f64::INFINITY || lx == f64::NEG_INFINITY {
                ExtendedRatio::Infinite
            } else if ly == f64::NEG_INFINITY || lx == f64::INFINITY {
                ExtendedRatio::Zero
            } else {
                ExtendedRatio::Finite(ly - lx)
            }
        }
        Ordering::Greater => {
            if y.is_finite() && x.is_positive() {
                ExtendedRatio::Zero
            } else {
                ExtendedRatio::Undefined
            }
        }
        Ordering::Less => {
            if x.is_finite() && y.is_positive() {
                ExtendedRatio::Infinite
            } else {
                ExtendedRatio::Undefined
            }
        }
    }
}

/// Measure-aware sum of two dimensioned weights, or `None` when the four
/// inputs do not determine it. At equal dimensions this is the ordinary sum
/// of densities; otherwise the lower-dimensional side absorbs the other.
pub fn sum(x: DimensionedWeight, y: DimensionedWeight) -> Option<DimensionedWeight> {
    use std::cmp::Ordering;
    match x.dim.cmp(&y.dim) {
        Ordering::Equal => Some(DimensionedWeight::new(
            x.dim,
            log_add_exp(x.log_weight, y.log_weight),
        )),
        Ordering::Less => {
            if y.is_finite() && x.is_positive() {
                Some(x)
            } else {
                None
            }
        }
        Ordering::Greater => {
            if x.is_finite() && y.is_positive() {
                Some(y)
            } else {
                None
            }
        }
    }
}

/// Product of two dimensioned weights: dimensions add, weights multiply.
///
/// Zero times infinity resolves to zero: a zero-probability factor
/// annihilates regardless of how the other factor blows up.
pub fn product(x: DimensionedWeight, y: DimensionedWeight) -> DimensionedWeight {
    let (lx, ly) = (x.log_weight, y.log_weight);
    let lw = if lx == f64::NEG_INFINITY || ly == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        lx + ly
    };
    DimensionedWeight::new(x.dim + y.dim, lw)
}

/// log(exp(a) + exp(b)) without overflow. Infinities behave as expected:
/// `+inf` dominates, two `-inf` stay `-inf`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a == f64::INFINITY || b == f64::INFINITY {
        return f64::INFINITY;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// log of a sum of exponentials over a slice. Empty input is log(0) = -inf.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if m == f64::INFINITY {
        return f64::INFINITY;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(dim: usize, weight: f64) -> DimensionedWeight {
        DimensionedWeight::from_weight(dim, weight)
    }

    #[test]
    fn ratio_equal_dims_is_plain_ratio() {
        let r = ratio(w(1, 0.5), w(1, 0.25));
        match r {
            ExtendedRatio::Finite(lr) => assert!((lr - 2.0_f64.ln()).abs() < 1e-15),
            other => panic!("expected finite ratio, got {other:?}"),
        }
    }

    #[test]
    fn ratio_higher_dim_loses() {
        assert_eq!(ratio(w(1, 0.1), w(0, 0.1)), ExtendedRatio::Zero);
    }

    #[test]
    fn ratio_lower_dim_wins() {
        assert_eq!(ratio(w(0, 0.1), w(1, 0.1)), ExtendedRatio::Infinite);
    }

    #[test]
    fn ratio_undefined_when_weights_degenerate() {
        assert_eq!(
            ratio(DimensionedWeight::zero(1), DimensionedWeight::zero(0)),
            ExtendedRatio::Undefined
        );
    }

    #[test]
    fn sum_equal_dims_adds() {
        let s = sum(w(1, 0.2), w(1, 0.3)).unwrap();
        assert_eq!(s.dim(), 1);
        assert!((s.log_weight() - 0.5_f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn sum_lower_dim_absorbs() {
        let s = sum(w(0, 0.3), w(1, 5.0)).unwrap();
        assert_eq!(s.dim(), 0);
        assert!((s.log_weight() - 0.3_f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn sum_undefined_when_lower_side_is_zero() {
        assert_eq!(sum(DimensionedWeight::zero(0), w(1, 0.5)), None);
    }

    #[test]
    fn product_adds_dims_and_multiplies_weights() {
        let p = product(w(0, 0.5), w(1, 0.1));
        assert_eq!(p.dim(), 1);
        assert!((p.weight() - 0.05).abs() < 1e-15);

        let p = product(w(2, 0.3), w(1, 2.0));
        assert_eq!(p.dim(), 3);
        assert!((p.weight() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn product_of_point_masses() {
        let p = product(w(0, 1.0), w(0, 1.0));
        assert_eq!(p.dim(), 0);
        assert_eq!(p.log_weight(), 0.0);
    }

    #[test]
    fn product_zero_annihilates_infinity() {
        let p = product(
            DimensionedWeight::zero(1),
            DimensionedWeight::new(0, f64::INFINITY),
        );
        assert!(p.is_zero());
        assert_eq!(p.dim(), 1);
    }

    #[test]
    fn log_add_exp_handles_sentinels() {
        assert_eq!(log_add_exp(f64::NEG_INFINITY, f64::NEG_INFINITY), f64::NEG_INFINITY);
        assert_eq!(log_add_exp(f64::INFINITY, 0.0), f64::INFINITY);
        assert_eq!(log_add_exp(0.5_f64.ln(), 0.5_f64.ln()), 0.0);
    }
}
