//! Invertible smooth maps with directional derivatives.
//!
//! A [`Bijector`] is a diffeomorphism from `R^n` onto its image in `R^m`
//! (`m >= n`). Besides `forward` and `inverse` it must evaluate
//! Jacobian-vector products, which is what tangent propagation needs; the
//! capability hooks (`is_coordinatewise`, `jacobian_logdet`,
//! `partial_derivative`) let the volume-correction dispatch pick cheap paths
//! without ever changing the answer.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// An invertible smooth map `f: R^n -> f(R^n) ⊆ R^m`.
pub trait Bijector {
    fn domain_dim(&self) -> usize;
    fn codomain_dim(&self) -> usize;

    fn forward(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Left inverse on the image: `inverse(forward(x)) == x`.
    fn inverse(&self, y: &[f64]) -> Result<Vec<f64>>;

    /// Directional derivative of `forward` at `x` along `v`.
    ///
    /// The default is a central finite difference; implementations with an
    /// analytic derivative should override it.
    fn jvp(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        fd_jvp(self, x, v)
    }

    /// True when the map applies an independent scalar bijection to every
    /// coordinate, so axis-aligned sparsity of tangent spaces is preserved.
    fn is_coordinatewise(&self) -> bool {
        false
    }

    /// `log |det J_f(x)|` when available. Implies `m == n`.
    fn jacobian_logdet(&self, _x: &[f64]) -> Option<f64> {
        None
    }

    /// `∂f_i/∂x_i` at `x` for coordinatewise maps.
    fn partial_derivative(&self, _x: &[f64], _i: usize) -> Option<f64> {
        None
    }
}

impl<B: Bijector + ?Sized> Bijector for &B {
    fn domain_dim(&self) -> usize {
        (**self).domain_dim()
    }
    fn codomain_dim(&self) -> usize {
        (**self).codomain_dim()
    }
    fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        (**self).forward(x)
    }
    fn inverse(&self, y: &[f64]) -> Result<Vec<f64>> {
        (**self).inverse(y)
    }
    fn jvp(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        (**self).jvp(x, v)
    }
    fn is_coordinatewise(&self) -> bool {
        (**self).is_coordinatewise()
    }
    fn jacobian_logdet(&self, x: &[f64]) -> Option<f64> {
        (**self).jacobian_logdet(x)
    }
    fn partial_derivative(&self, x: &[f64], i: usize) -> Option<f64> {
        (**self).partial_derivative(x, i)
    }
}

impl Bijector for Box<dyn Bijector> {
    fn domain_dim(&self) -> usize {
        (**self).domain_dim()
    }
    fn codomain_dim(&self) -> usize {
        (**self).codomain_dim()
    }
    fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        (**self).forward(x)
    }
    fn inverse(&self, y: &[f64]) -> Result<Vec<f64>> {
        (**self).inverse(y)
    }
    fn jvp(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        (**self).jvp(x, v)
    }
    fn is_coordinatewise(&self) -> bool {
        (**self).is_coordinatewise()
    }
    fn jacobian_logdet(&self, x: &[f64]) -> Option<f64> {
        (**self).jacobian_logdet(x)
    }
    fn partial_derivative(&self, x: &[f64], i: usize) -> Option<f64> {
        (**self).partial_derivative(x, i)
    }
}

/// Central-difference directional derivative:
/// `(f(x + h·u) - f(x - h·u)) / 2h · ‖v‖` with `u = v/‖v‖` and a
/// cube-root-epsilon step scaled by `1 + ‖x‖`.
pub fn fd_jvp<B: Bijector + ?Sized>(b: &B, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let norm_v = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm_v == 0.0 {
        return Ok(vec![0.0; b.codomain_dim()]);
    }
    let norm_x = x.iter().map(|c| c * c).sum::<f64>().sqrt();
    let h = f64::EPSILON.cbrt() * (1.0 + norm_x);

    let plus: Vec<f64> = x.iter().zip(v).map(|(xi, vi)| xi + h * vi / norm_v).collect();
    let minus: Vec<f64> = x.iter().zip(v).map(|(xi, vi)| xi - h * vi / norm_v).collect();
    let fp = b.forward(&plus)?;
    let fm = b.forward(&minus)?;

    let out: Vec<f64> = fp
        .iter()
        .zip(&fm)
        .map(|(p, m)| (p - m) / (2.0 * h) * norm_v)
        .collect();
    if out.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFiniteDerivative(format!(
            "finite difference at x = {x:?} produced a non-finite entry"
        )));
    }
    Ok(out)
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        Err(Error::DimensionMismatch { expected, got })
    } else {
        Ok(())
    }
}

/// The identity map on `R^n`.
#[derive(Debug, Clone)]
pub struct Identity {
    dim: usize,
}

impl Identity {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl Bijector for Identity {
    fn domain_dim(&self) -> usize {
        self.dim
    }
    fn codomain_dim(&self) -> usize {
        self.dim
    }
    fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        Ok(x.to_vec())
    }
    fn inverse(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, y.len())?;
        Ok(y.to_vec())
    }
    fn jvp(&self, _x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, v.len())?;
        Ok(v.to_vec())
    }
    fn is_coordinatewise(&self) -> bool {
        true
    }
    fn jacobian_logdet(&self, _x: &[f64]) -> Option<f64> {
        Some(0.0)
    }
    fn partial_derivative(&self, _x: &[f64], _i: usize) -> Option<f64> {
        Some(1.0)
    }
}

/// Coordinatewise scaling `x ↦ s ⊙ x` with nonzero scales.
#[derive(Debug, Clone)]
pub struct ScaleDiag {
    scales: Vec<f64>,
    logdet: f64,
}

impl ScaleDiag {
    pub fn new(scales: Vec<f64>) -> Result<Self> {
        if scales.iter().any(|s| *s == 0.0 || !s.is_finite()) {
            return Err(Error::InvalidBijector(
                "scale entries must be nonzero and finite".into(),
            ));
        }
        let logdet = scales.iter().map(|s| s.abs().ln()).sum();
        Ok(Self { scales, logdet })
    }
}

impl Bijector for ScaleDiag {
    fn domain_dim(&self) -> usize {
        self.scales.len()
    }
    fn codomain_dim(&self) -> usize {
        self.scales.len()
    }
    fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.scales.len(), x.len())?;
        Ok(x.iter().zip(&self.scales).map(|(xi, s)| xi * s).collect())
    }
    fn inverse(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.scales.len(), y.len())?;
        Ok(y.iter().zip(&self.scales).map(|(yi, s)| yi / s).collect())
    }
    fn jvp(&self, _x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.scales.len(), v.len())?;
        Ok(v.iter().zip(&self.scales).map(|(vi, s)| vi * s).collect())
    }
    fn is_coordinatewise(&self) -> bool {
        true
    }
    fn jacobian_logdet(&self, _x: &[f64]) -> Option<f64> {
        Some(self.logdet)
    }
    fn partial_derivative(&self, _x: &[f64], i: usize) -> Option<f64> {
        self.scales.get(i).copied()
    }
}

/// Affine map `x ↦ A x + b` with invertible `A`.
#[derive(Debug, Clone)]
pub struct Affine {
    matrix: DMatrix<f64>,
    shift: DVector<f64>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    logdet: f64,
}

impl Affine {
    pub fn new(matrix: DMatrix<f64>, shift: Vec<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::InvalidBijector("matrix must be square".into()));
        }
        check_dim(n, shift.len())?;
        let lu = matrix.clone().lu();
        let det = lu.determinant();
        // Scale-aware singularity test, consistent with the tangent-basis
        // rank tolerance.
        let row_norm_product: f64 = matrix.row_iter().map(|r| r.norm()).product();
        if !det.is_finite() || det.abs() <= 1e-12 * row_norm_product {
            return Err(Error::InvalidBijector(format!(
                "matrix is numerically singular (det = {det})"
            )));
        }
        Ok(Self {
            matrix,
            shift: DVector::from_vec(shift),
            lu,
            logdet: det.abs().ln(),
        })
    }
}

impl Bijector for Affine {
    fn domain_dim(&self) -> usize {
        self.matrix.nrows()
    }
    fn codomain_dim(&self) -> usize {
        self.matrix.nrows()
    }
    fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.domain_dim(), x.len())?;
        let out = &self.matrix * DVector::from_column_slice(x) + &self.shift;
        Ok(out.data.into())
    }
    fn inverse(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.domain_dim(), y.len())?;
        let rhs = DVector::from_column_slice(y) - &self.shift;
        let x = self
            .lu
            .solve(&rhs)
            .ok_or_else(|| Error::InvalidBijector("LU solve failed".into()))?;
        Ok(x.data.into())
    }
    fn jvp(&self, _x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.domain_dim(), v.len())?;
        let out = &self.matrix * DVector::from_column_slice(v);
        Ok(out.data.into())
    }
    fn jacobian_logdet(&self, _x: &[f64]) -> Option<f64> {
        Some(self.logdet)
    }
}

/// A strictly monotone scalar bijection with a nonvanishing derivative,
/// applied per coordinate by [`Coordinatewise`].
pub trait ScalarBijection {
    fn forward(&self, x: f64) -> Result<f64>;
    fn inverse(&self, y: f64) -> Result<f64>;
    fn derivative(&self, x: f64) -> f64;
}

/// `exp` per coordinate; the inverse rejects nonpositive inputs.
#[derive(Debug, Clone)]
pub struct Exp;

impl ScalarBijection for Exp {
    fn forward(&self, x: f64) -> Result<f64> {
        Ok(x.exp())
    }
    fn inverse(&self, y: f64) -> Result<f64> {
        if y <= 0.0 {
            return Err(Error::DomainError(format!(
                "inverse of exp is undefined at {y}"
            )));
        }
        Ok(y.ln())
    }
    fn derivative(&self, x: f64) -> f64 {
        x.exp()
    }
}

/// A univariate bijection applied independently to every coordinate.
#[derive(Debug, Clone)]
pub struct Coordinatewise<G> {
    g: G,
    dim: usize,
}

impl<G: ScalarBijection> Coordinatewise<G> {
    pub fn new(g: G, dim: usize) -> Self {
        Self { g, dim }
    }
}

/// `exp` applied to each of `dim` coordinates.
pub fn coordinatewise_exp(dim: usize) -> Coordinatewise<Exp> {
    Coordinatewise::new(Exp, dim)
}

impl<G: ScalarBijection> Bijector for Coordinatewise<G> {
    fn domain_dim(&self) -> usize {
        self.dim
    }
    fn codomain_dim(&self) -> usize {
        self.dim
    }
    fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        x.iter().map(|&xi| self.g.forward(xi)).collect()
    }
    fn inverse(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, y.len())?;
        y.iter().map(|&yi| self.g.inverse(yi)).collect()
    }
    fn jvp(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        check_dim(self.dim, v.len())?;
        let out: Vec<f64> = x
            .iter()
            .zip(v)
            .map(|(&xi, &vi)| self.g.derivative(xi) * vi)
            .collect();
        if out.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteDerivative(format!(
                "coordinatewise derivative non-finite at x = {x:?}"
            )));
        }
        Ok(out)
    }
    fn is_coordinatewise(&self) -> bool {
        true
    }
    fn jacobian_logdet(&self, x: &[f64]) -> Option<f64> {
        Some(x.iter().map(|&xi| self.g.derivative(xi).abs().ln()).sum())
    }
    fn partial_derivative(&self, x: &[f64], i: usize) -> Option<f64> {
        x.get(i).map(|&xi| self.g.derivative(xi))
    }
}

/// A smooth (not necessarily invertible) map `R^n -> R^k`, used to build
/// graph embeddings. The default `jvp` is a central finite difference.
pub trait SmoothMap {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Vec<f64>;
    fn jvp(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let norm_v = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm_v == 0.0 {
            return vec![0.0; self.dim_out()];
        }
        let norm_x = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        let h = f64::EPSILON.cbrt() * (1.0 + norm_x);
        let plus: Vec<f64> = x.iter().zip(v).map(|(xi, vi)| xi + h * vi / norm_v).collect();
        let minus: Vec<f64> = x.iter().zip(v).map(|(xi, vi)| xi - h * vi / norm_v).collect();
        self.eval(&plus)
            .iter()
            .zip(self.eval(&minus))
            .map(|(p, m)| (p - m) / (2.0 * h) * norm_v)
            .collect()
    }
}

/// Graph embedding `x ↦ (x, g(x))`, a diffeomorphism from `R^n` onto the
/// graph of `g` in `R^{n+k}`. The inverse is projection onto the first `n`
/// coordinates.
pub struct GraphEmbed<G> {
    g: G,
}

impl<G: SmoothMap> GraphEmbed<G> {
    pub fn new(g: G) -> Self {
        Self { g }
    }
}

impl<G: SmoothMap> Bijector for GraphEmbed<G> {
    fn domain_dim(&self) -> usize {
        self.g.dim_in()
    }
    fn codomain_dim(&self) -> usize {
        self.g.dim_in() + self.g.dim_out()
    }
    fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.g.dim_in(), x.len())?;
        let mut out = x.to_vec();
        out.extend(self.g.eval(x));
        Ok(out)
    }
    fn inverse(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.codomain_dim(), y.len())?;
        Ok(y[..self.g.dim_in()].to_vec())
    }
    fn jvp(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.g.dim_in(), x.len())?;
        check_dim(self.g.dim_in(), v.len())?;
        let mut out = v.to_vec();
        out.extend(self.g.jvp(x, v));
        if out.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteDerivative(format!(
                "graph embedding derivative non-finite at x = {x:?}"
            )));
        }
        Ok(out)
    }
}

/// Composition `second ∘ first`.
pub struct Chain<F, S> {
    first: F,
    second: S,
}

impl<F: Bijector, S: Bijector> Chain<F, S> {
    pub fn new(first: F, second: S) -> Result<Self> {
        check_dim(second.domain_dim(), first.codomain_dim())?;
        Ok(Self { first, second })
    }
}

impl<F: Bijector, S: Bijector> Bijector for Chain<F, S> {
    fn domain_dim(&self) -> usize {
        self.first.domain_dim()
    }
    fn codomain_dim(&self) -> usize {
        self.second.codomain_dim()
    }
    fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.second.forward(&self.first.forward(x)?)
    }
    fn inverse(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.first.inverse(&self.second.inverse(y)?)
    }
    fn jvp(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        let mid = self.first.forward(x)?;
        let v_mid = self.first.jvp(x, v)?;
        self.second.jvp(&mid, &v_mid)
    }
    fn is_coordinatewise(&self) -> bool {
        self.first.is_coordinatewise() && self.second.is_coordinatewise()
    }
    fn jacobian_logdet(&self, x: &[f64]) -> Option<f64> {
        let a = self.first.jacobian_logdet(x)?;
        let mid = self.first.forward(x).ok()?;
        let b = self.second.jacobian_logdet(&mid)?;
        Some(a + b)
    }
    fn partial_derivative(&self, x: &[f64], i: usize) -> Option<f64> {
        if !self.is_coordinatewise() {
            return None;
        }
        let a = self.first.partial_derivative(x, i)?;
        let mid = self.first.forward(x).ok()?;
        let b = self.second.partial_derivative(&mid, i)?;
        Some(a * b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (ai, bi) in a.iter().zip(b) {
            let scale = 1.0 + ai.abs().max(bi.abs());
            assert!(
                (ai - bi).abs() <= tol * scale,
                "{a:?} vs {b:?} beyond tol {tol}"
            );
        }
    }

    #[test]
    fn scale_forward_matches_example() {
        let s = ScaleDiag::new(vec![2.0, 20.0]).unwrap();
        assert_eq!(s.forward(&[1.0, 0.0]).unwrap(), vec![2.0, 0.0]);
        assert!((s.jacobian_logdet(&[0.0, 0.0]).unwrap() - 40.0_f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn scale_rejects_zero_entry() {
        assert!(ScaleDiag::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn unit_scale_is_identity() {
        let s = ScaleDiag::new(vec![1.0, 1.0]).unwrap();
        assert_eq!(s.forward(&[0.3, -0.7]).unwrap(), vec![0.3, -0.7]);
        assert_eq!(s.jacobian_logdet(&[0.0, 0.0]), Some(0.0));
    }

    #[test]
    fn affine_matches_scale_diag() {
        let a = Affine::new(
            DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 20.0]),
            vec![0.0, 0.0],
        )
        .unwrap();
        let s = ScaleDiag::new(vec![2.0, 20.0]).unwrap();
        let x = [0.4, -1.3];
        assert_close(&a.forward(&x).unwrap(), &s.forward(&x).unwrap(), 1e-15);
        assert!((a.jacobian_logdet(&x).unwrap() - s.jacobian_logdet(&x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn shear_has_zero_logdet() {
        let a = Affine::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]),
            vec![0.0, 0.0],
        )
        .unwrap();
        assert!(a.jacobian_logdet(&[0.0, 0.0]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn affine_rejects_singular_matrix() {
        let r = Affine::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]),
            vec![0.0, 0.0],
        );
        assert!(matches!(r, Err(Error::InvalidBijector(_))));
    }

    #[test]
    fn exp_roundtrip_and_partials() {
        let e = coordinatewise_exp(2);
        assert_close(&e.forward(&[0.0, 0.0]).unwrap(), &[1.0, 1.0], 1e-15);
        assert_close(
            &e.inverse(&[std::f64::consts::E, std::f64::consts::E.powi(2)]).unwrap(),
            &[1.0, 2.0],
            1e-15,
        );
        assert_eq!(e.partial_derivative(&[0.0, 0.0], 1), Some(1.0));
    }

    #[test]
    fn exp_inverse_rejects_nonpositive() {
        let e = coordinatewise_exp(1);
        assert!(matches!(e.inverse(&[-1.0]), Err(Error::DomainError(_))));
    }

    struct SquaredNorm {
        dim: usize,
    }

    impl SmoothMap for SquaredNorm {
        fn dim_in(&self) -> usize {
            self.dim
        }
        fn dim_out(&self) -> usize {
            1
        }
        fn eval(&self, x: &[f64]) -> Vec<f64> {
            vec![x.iter().map(|c| c * c).sum()]
        }
        fn jvp(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
            vec![2.0 * x.iter().zip(v).map(|(xi, vi)| xi * vi).sum::<f64>()]
        }
    }

    #[test]
    fn graph_embed_squared_norm() {
        let g = GraphEmbed::new(SquaredNorm { dim: 1 });
        assert_eq!(g.forward(&[2.0]).unwrap(), vec![2.0, 4.0]);
        assert_eq!(g.jvp(&[2.0], &[1.0]).unwrap(), vec![1.0, 4.0]);
        assert_eq!(g.inverse(&[2.0, 4.0]).unwrap(), vec![2.0]);
    }

    #[test]
    fn chain_of_inverse_scales_is_identity() {
        let c = Chain::new(
            ScaleDiag::new(vec![2.0, 20.0]).unwrap(),
            ScaleDiag::new(vec![0.5, 0.05]).unwrap(),
        )
        .unwrap();
        let x = [1.7, -0.2];
        assert_close(&c.forward(&x).unwrap(), &x, 1e-15);
        assert!(c.jacobian_logdet(&x).unwrap().abs() < 1e-15);
    }

    #[test]
    fn chain_logdet_sums() {
        let scale = ScaleDiag::new(vec![3.0, 0.5]).unwrap();
        let affine = Affine::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 2.0, -1.0, 1.0]),
            vec![0.5, -0.5],
        )
        .unwrap();
        let x = [0.2, 0.9];
        let expected = scale.jacobian_logdet(&x).unwrap() + affine.jacobian_logdet(&x).unwrap();
        let c = Chain::new(scale, affine).unwrap();
        assert!((c.jacobian_logdet(&x).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn chain_with_identity_matches_inner() {
        let s = ScaleDiag::new(vec![2.0, 20.0]).unwrap();
        let c = Chain::new(ScaleDiag::new(vec![2.0, 20.0]).unwrap(), Identity::new(2)).unwrap();
        for x in [[0.1, 0.2], [-1.0, 3.0], [4.0, -0.5]] {
            assert_close(&c.forward(&x).unwrap(), &s.forward(&x).unwrap(), 1e-15);
        }
    }

    #[test]
    fn chain_rejects_dim_mismatch() {
        let r = Chain::new(
            ScaleDiag::new(vec![2.0]).unwrap(),
            ScaleDiag::new(vec![2.0, 3.0]).unwrap(),
        );
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn fd_jvp_matches_analytic_scale() {
        let s = ScaleDiag::new(vec![2.0, 20.0]).unwrap();
        let got = fd_jvp(&s, &[0.3, -0.4], &[1.0, 0.0]).unwrap();
        assert_close(&got, &[2.0, 0.0], 1e-7);
    }

    #[test]
    fn fd_jvp_identity_is_exact_up_to_rounding() {
        let id = Identity::new(3);
        let v = [0.5, -2.0, 1.5];
        let got = fd_jvp(&id, &[1.0, 2.0, 3.0], &v).unwrap();
        assert_close(&got, &v, 1e-12);
    }

    struct Cubic;
    impl SmoothMap for Cubic {
        fn dim_in(&self) -> usize {
            1
        }
        fn dim_out(&self) -> usize {
            1
        }
        fn eval(&self, x: &[f64]) -> Vec<f64> {
            vec![x[0].powi(3)]
        }
    }

    #[test]
    fn fd_jvp_cubic_scalar() {
        // Derivative of x^3 at 1 is 3; the graph embedding carries it in the
        // second output coordinate via the SmoothMap finite-difference default.
        let g = GraphEmbed::new(Cubic);
        let got = g.jvp(&[1.0], &[1.0]).unwrap();
        assert!((got[1] - 3.0).abs() < 1e-6, "got {}", got[1]);
    }

    #[test]
    fn roundtrip_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let scale = ScaleDiag::new(vec![2.0, -0.3, 5.0]).unwrap();
        let affine = Affine::new(
            DMatrix::from_row_slice(3, 3, &[2.0, 0.1, 0.0, -0.4, 1.5, 0.2, 0.0, 0.3, 0.9]),
            vec![1.0, -2.0, 0.5],
        )
        .unwrap();
        let exp = coordinatewise_exp(3);
        let bijectors: Vec<&dyn Bijector> = vec![&scale, &affine, &exp];
        for b in bijectors {
            for _ in 0..100 {
                let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let back = b.inverse(&b.forward(&x).unwrap()).unwrap();
                assert_close(&back, &x, 1e-9);
            }
        }
    }

    #[test]
    fn fd_matches_analytic_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let scale = ScaleDiag::new(vec![2.0, -0.3, 5.0]).unwrap();
        let affine = Affine::new(
            DMatrix::from_row_slice(3, 3, &[2.0, 0.1, 0.0, -0.4, 1.5, 0.2, 0.0, 0.3, 0.9]),
            vec![1.0, -2.0, 0.5],
        )
        .unwrap();
        let exp = coordinatewise_exp(3);
        let bijectors: Vec<&dyn Bijector> = vec![&scale, &affine, &exp];
        for b in bijectors {
            for _ in 0..100 {
                let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.5..1.5)).collect();
                let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let analytic = b.jvp(&x, &v).unwrap();
                let fd = fd_jvp(b, &x, &v).unwrap();
                assert_close(&fd, &analytic, 1e-5);
            }
        }
    }

    #[test]
    fn jvp_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let exp = coordinatewise_exp(2);
        for _ in 0..50 {
            let x: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let u: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (alpha, beta): (f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let combo: Vec<f64> = u
                .iter()
                .zip(&v)
                .map(|(ui, vi)| alpha * ui + beta * vi)
                .collect();
            let lhs = exp.jvp(&x, &combo).unwrap();
            let ju = exp.jvp(&x, &u).unwrap();
            let jv = exp.jvp(&x, &v).unwrap();
            let rhs: Vec<f64> = ju
                .iter()
                .zip(&jv)
                .map(|(a, b)| alpha * a + beta * b)
                .collect();
            assert_close(&lhs, &rhs, 1e-9);
        }
    }
}
