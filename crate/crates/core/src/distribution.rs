//! The distribution contract and concrete distributions.
//!
//! A [`Distribution`] couples a sampler with a *local measure* query: at any
//! point it reports the log-density with respect to the Hausdorff measure of
//! the support's dimension, together with the tangent space of the support
//! there. That pair is all the pushforward machinery ever needs — no global
//! knowledge of the support manifold is represented.
//!
//! Concrete types cover one support class each: full-dimensional
//! ([`StdNormal`], [`UniformBox`]), a curved manifold
//! ([`UniformUnitCircle`]), discrete ([`FiniteDiscrete`]), structured-sparse
//! ([`LowerTriangularIid`]), and mixed-dimension unions ([`Mixture`]).

use rand::Rng;
use rand::RngCore;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::tangent::{spans_equal, TangentSpace};
use crate::weight::{log_sum_exp, DimensionedWeight};

/// Absolute tolerance for support-membership tests, applied after the
/// defining constraint is normalized to unit gradient scale. Floating-point
/// samples of a transformed manifold land near, not on, the surface.
pub const MEMBERSHIP_TOLERANCE: f64 = 1e-9;

const LN_2PI: f64 = 1.8378770664093453;

/// The local description of a distribution at a point: log-density with
/// respect to `H^d`, plus the tangent space of the support (of dimension
/// `d`) at that point.
///
/// `log_density == -inf` exactly when the point is off the support; the
/// tangent then still carries the support's dimension. `off_image` is a
/// diagnostic set by pushforwards when the point failed the image
/// round-trip test.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalMeasure {
    pub point: Vec<f64>,
    pub log_density: f64,
    pub tangent: TangentSpace,
    pub off_image: bool,
}

impl LocalMeasure {
    pub fn new(point: Vec<f64>, log_density: f64, tangent: TangentSpace) -> Self {
        debug_assert_eq!(point.len(), tangent.ambient_dim());
        Self { point, log_density, tangent, off_image: false }
    }

    /// Off-support: zero density carried against the manifold's own
    /// dimension, so the dimension channel stays meaningful.
    pub fn off_support(point: Vec<f64>, tangent: TangentSpace) -> Self {
        Self { point, log_density: f64::NEG_INFINITY, tangent, off_image: false }
    }

    pub fn dimension(&self) -> usize {
        self.tangent.dimension()
    }

    pub fn is_on_support(&self) -> bool {
        self.log_density > f64::NEG_INFINITY
    }

    /// The (dimension, density) pair the weight algebra operates on.
    pub fn dimensioned_weight(&self) -> DimensionedWeight {
        DimensionedWeight::new(self.dimension(), self.log_density)
    }
}

/// A sampler plus local-measure query.
///
/// Samples must lie on the support: `local_measure(sample(rng))` has finite
/// log-density. `local_measure` is pure; `sample` needs exclusive access to
/// its RNG.
pub trait Distribution {
    fn ambient_dim(&self) -> usize;
    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64>;
    fn local_measure(&self, x: &[f64]) -> Result<LocalMeasure>;
}

impl<D: Distribution + ?Sized> Distribution for &D {
    fn ambient_dim(&self) -> usize {
        (**self).ambient_dim()
    }
    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        (**self).sample(rng)
    }
    fn local_measure(&self, x: &[f64]) -> Result<LocalMeasure> {
        (**self).local_measure(x)
    }
}

impl Distribution for Box<dyn Distribution> {
    fn ambient_dim(&self) -> usize {
        (**self).ambient_dim()
    }
    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        (**self).sample(rng)
    }
    fn local_measure(&self, x: &[f64]) -> Result<LocalMeasure> {
        (**self).local_measure(x)
    }
}

fn check_point_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::DimensionMismatch { expected, got: x.len() });
    }
    Ok(())
}

/// Uniform distribution on the unit circle in `R^2`: density `1/2pi` with
/// respect to arc length, tangent direction `(-y, x)`.
#[derive(Debug, Clone, Default)]
pub struct UniformUnitCircle;

impl UniformUnitCircle {
    pub fn new() -> Self {
        Self
    }
}

impl Distribution for UniformUnitCircle {
    fn ambient_dim(&self) -> usize {
        2
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        let theta: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
        vec![theta.cos(), theta.sin()]
    }

    fn local_measure(&self, p: &[f64]) -> Result<LocalMeasure> {
        check_point_dim(2, p)?;
        let (x, y) = (p[0], p[1]);
        let r = (x * x + y * y).sqrt();
        // |r - 1| is the unit-gradient normalization of |x^2 + y^2 - 1|.
        if (r - 1.0).abs() <= MEMBERSHIP_TOLERANCE {
            let tangent = TangentSpace::general_from_rows(2, &[vec![-y, x]])?;
            Ok(LocalMeasure::new(p.to_vec(), -std::f64::consts::TAU.ln(), tangent))
        } else {
            // Off support: keep a unit placeholder direction so the local
            // dimension stays 1.
            let dir = if r > MEMBERSHIP_TOLERANCE {
                vec![-y / r, x / r]
            } else {
                vec![0.0, 1.0]
            };
            let tangent = TangentSpace::general_from_rows(2, &[dir])?;
            Ok(LocalMeasure::off_support(p.to_vec(), tangent))
        }
    }
}

/// Atoms `a_k` with probabilities `w_k`, embedded in `R^n`. Densities are
/// with respect to counting measure (`H^0`).
#[derive(Debug, Clone)]
pub struct FiniteDiscrete {
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
    ambient_dim: usize,
}

impl FiniteDiscrete {
    pub fn new(atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(Error::InvalidDistribution(
                "need equally many atoms and weights, at least one".into(),
            ));
        }
        let ambient_dim = atoms[0].len();
        if atoms.iter().any(|a| a.len() != ambient_dim) {
            return Err(Error::InvalidDistribution("atoms must share a dimension".into()));
        }
        if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidDistribution("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { atoms, weights, ambient_dim })
    }

    /// Two atoms 0 and 1 on the line with probabilities `1-p` and `p`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::new(vec![vec![0.0], vec![1.0]], vec![1.0 - p, p])
    }

    /// A single atom of mass 1.
    pub fn point_mass(point: Vec<f64>) -> Self {
        let ambient_dim = point.len();
        Self { atoms: vec![point], weights: vec![1.0], ambient_dim }
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl Distribution for FiniteDiscrete {
    fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        let u: f64 = rng.gen();
        let mut cum = 0.0;
        for (atom, w) in self.atoms.iter().zip(&self.weights) {
            cum += w;
            if u < cum {
                return atom.clone();
            }
        }
        self.atoms.last().expect("nonempty").clone()
    }

    fn local_measure(&self, x: &[f64]) -> Result<LocalMeasure> {
        check_point_dim(self.ambient_dim, x)?;
        for (atom, w) in self.atoms.iter().zip(&self.weights) {
            let dist2: f64 = atom.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            if dist2.sqrt() <= MEMBERSHIP_TOLERANCE {
                return Ok(LocalMeasure::new(
                    x.to_vec(),
                    w.ln(),
                    TangentSpace::zero(self.ambient_dim),
                ));
            }
        }
        Ok(LocalMeasure::off_support(x.to_vec(), TangentSpace::zero(self.ambient_dim)))
    }
}

/// Standard normal on `R^n`.
#[derive(Debug, Clone)]
pub struct StdNormal {
    dim: usize,
}

impl StdNormal {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl Distribution for StdNormal {
    fn ambient_dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        (0..self.dim).map(|_| rng.sample(StandardNormal)).collect()
    }

    fn local_measure(&self, x: &[f64]) -> Result<LocalMeasure> {
        check_point_dim(self.dim, x)?;
        let sq: f64 = x.iter().map(|c| c * c).sum();
        let ld = -0.5 * (self.dim as f64 * LN_2PI + sq);
        Ok(LocalMeasure::new(x.to_vec(), ld, TangentSpace::full(self.dim)))
    }
}

/// Uniform distribution on an axis-aligned box with positive volume.
#[derive(Debug, Clone)]
pub struct UniformBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
    log_density: f64,
}

impl UniformBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidDistribution("box bounds must match and be nonempty".into()));
        }
        if lo
            .iter()
            .zip(&hi)
            .any(|(l, h)| !l.is_finite() || !h.is_finite() || h <= l)
        {
            return Err(Error::InvalidDistribution(
                "box bounds must be finite with positive volume".into(),
            ));
        }
        let log_volume: f64 = lo.iter().zip(&hi).map(|(l, h)| (h - l).ln()).sum();
        Ok(Self { lo, hi, log_density: -log_volume })
    }
}

impl Distribution for UniformBox {
    fn ambient_dim(&self) -> usize {
        self.lo.len()
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| l + rng.gen::<f64>() * (h - l))
            .collect()
    }

    fn local_measure(&self, x: &[f64]) -> Result<LocalMeasure> {
        check_point_dim(self.lo.len(), x)?;
        let inside = x
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(xi, (l, h))| *xi >= *l && *xi <= *h);
        let n = self.lo.len();
        if inside {
            Ok(LocalMeasure::new(x.to_vec(), self.log_density, TangentSpace::full(n)))
        } else {
            Ok(LocalMeasure::off_support(x.to_vec(), TangentSpace::full(n)))
        }
    }
}

/// I.i.d. entries from a scalar base distribution on the lower triangle of a
/// `k x k` matrix, flattened row-major into `R^{k*k}`. The support is the
/// axis-aligned subspace where every strictly-upper entry is zero.
pub struct LowerTriangularIid<D> {
    k: usize,
    base: D,
    mask: Vec<bool>,
}

impl<D: Distribution> LowerTriangularIid<D> {
    pub fn new(k: usize, base: D) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidDistribution("matrix side must be positive".into()));
        }
        if base.ambient_dim() != 1 {
            return Err(Error::InvalidDistribution("base distribution must be scalar".into()));
        }
        let mask: Vec<bool> = (0..k * k).map(|idx| idx % k <= idx / k).collect();
        Ok(Self { k, base, mask })
    }
}

impl<D: Distribution> Distribution for LowerTriangularIid<D> {
    fn ambient_dim(&self) -> usize {
        self.k * self.k
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        self.mask
            .iter()
            .map(|on| if *on { self.base.sample(rng)[0] } else { 0.0 })
            .collect()
    }

    fn local_measure(&self, x: &[f64]) -> Result<LocalMeasure> {
        check_point_dim(self.k * self.k, x)?;
        let tangent = TangentSpace::axis_aligned(self.k * self.k, self.mask.clone())?;
        let off_manifold = x
            .iter()
            .zip(&self.mask)
            .any(|(xi, on)| !*on && xi.abs() > MEMBERSHIP_TOLERANCE);
        if off_manifold {
            return Ok(LocalMeasure::off_support(x.to_vec(), tangent));
        }
        let mut ld = 0.0;
        for (xi, on) in x.iter().zip(&self.mask) {
            if *on {
                ld += self.base.local_measure(&[*xi])?.log_density;
            }
        }
        Ok(LocalMeasure { point: x.to_vec(), log_density: ld, tangent, off_image: false })
    }
}

/// Convex combination of distributions whose supports may have different
/// dimensions. The base measure is the sum of the components' Hausdorff
/// measures, so at a point the density comes from the minimal-dimension
/// components supported there; higher-dimensional contributions are zero
/// against that base.
///
/// When several minimal-dimension components overlap at a point of equal
/// dimension, their densities are summed. That summed-mass rule is the
/// least-surprise choice for a measure-zero set; the tangent must then be
/// unambiguous, and disagreement is an error.
pub struct Mixture {
    components: Vec<(f64, Box<dyn Distribution>)>,
    ambient_dim: usize,
}

impl Mixture {
    pub fn new(components: Vec<(f64, Box<dyn Distribution>)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidDistribution("mixture needs at least one component".into()));
        }
        let ambient_dim = components[0].1.ambient_dim();
        if components.iter().any(|(_, d)| d.ambient_dim() != ambient_dim) {
            return Err(Error::InvalidDistribution(
                "mixture components must share the ambient dimension".into(),
            ));
        }
        if components.iter().any(|(p, _)| *p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidDistribution(
                "mixture weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = components.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!(
                "mixture weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { components, ambient_dim })
    }
}

impl Distribution for Mixture {
    fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        let u: f64 = rng.gen();
        let mut cum = 0.0;
        for (p, d) in &self.components {
            cum += p;
            if u < cum {
                return d.sample(rng);
            }
        }
        self.components.last().expect("nonempty").1.sample(rng)
    }

    fn local_measure(&self, x: &[f64]) -> Result<LocalMeasure> {
        check_point_dim(self.ambient_dim, x)?;
        let mut supported: Vec<(f64, LocalMeasure)> = Vec::new();
        for (p, d) in &self.components {
            let lm = d.local_measure(x)?;
            if lm.is_on_support() {
                supported.push((*p, lm));
            }
        }
        if supported.is_empty() {
            return Ok(LocalMeasure::off_support(
                x.to_vec(),
                TangentSpace::zero(self.ambient_dim),
            ));
        }
        let min_dim = supported.iter().map(|(_, lm)| lm.dimension()).min().expect("nonempty");
        let minimal: Vec<&(f64, LocalMeasure)> =
            supported.iter().filter(|(_, lm)| lm.dimension() == min_dim).collect();
        for (_, lm) in minimal.iter().skip(1) {
            if !spans_equal(&minimal[0].1.tangent, &lm.tangent, 1e-9) {
                return Err(Error::AmbiguousTangent);
            }
        }
        let terms: Vec<f64> = minimal.iter().map(|(p, lm)| p.ln() + lm.log_density).collect();
        Ok(LocalMeasure::new(
            x.to_vec(),
            log_sum_exp(&terms),
            minimal[0].1.tangent.clone(),
        ))
    }
}
