//! Tangent spaces of support manifolds and the Gram-determinant volume
//! correction.
//!
//! A distribution supported on a `d`-dimensional manifold in `R^n` is
//! described locally by a basis of the tangent space at the query point.
//! When a bijection `f` moves the point, the basis moves by directional
//! derivatives, and the density picks up the factor
//! `sqrt(det(V V^T)) / sqrt(det(V' V'^T))` — the ratio of the `d`-volumes of
//! the basis parallelepipeds before and after. The dispatch below recognizes
//! the variants where one or both Gram determinants are trivially 1 and
//! skips the linear algebra.

use nalgebra::DMatrix;

use crate::bijector::Bijector;
use crate::error::{Error, Result};

/// Scale-aware rank tolerance: a basis is degenerate when
/// `sqrt(det(V V^T)) < RANK_TOLERANCE * prod_i ‖v_i‖`.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// The tangent space of a support manifold at a point, in one of four
/// representations ordered from cheapest to most general.
///
/// `General` bases must have linearly independent rows; construct them
/// through [`TangentSpace::general`] to get the rank check.
#[derive(Debug, Clone, PartialEq)]
pub enum TangentSpace {
    /// Discrete support: the zero subspace, `d = 0`.
    Zero { ambient_dim: usize },
    /// Support is all of `R^n`: the implicit basis is the standard basis.
    Full { ambient_dim: usize },
    /// Axis-aligned subspace: the basis is the subset of the standard basis
    /// selected by `mask`.
    AxisAligned { ambient_dim: usize, mask: Vec<bool> },
    /// Arbitrary subspace spanned by the rows of a `d x n` matrix.
    General { basis: DMatrix<f64> },
}

impl TangentSpace {
    pub fn zero(ambient_dim: usize) -> Self {
        TangentSpace::Zero { ambient_dim }
    }

    pub fn full(ambient_dim: usize) -> Self {
        TangentSpace::Full { ambient_dim }
    }

    pub fn axis_aligned(ambient_dim: usize, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: ambient_dim,
                got: mask.len(),
            });
        }
        Ok(TangentSpace::AxisAligned { ambient_dim, mask })
    }

    /// General tangent space from a `d x n` matrix whose rows span it.
    /// Fails with [`Error::DegenerateBasis`] when the rows are numerically
    /// dependent.
    pub fn general(basis: DMatrix<f64>) -> Result<Self> {
        gram_log_sqrt_det(&basis)?;
        Ok(TangentSpace::General { basis })
    }

    /// Convenience constructor from row slices.
    pub fn general_from_rows(ambient_dim: usize, rows: &[Vec<f64>]) -> Result<Self> {
        for row in rows {
            if row.len() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    got: row.len(),
                });
            }
        }
        let basis = DMatrix::from_fn(rows.len(), ambient_dim, |i, j| rows[i][j]);
        Self::general(basis)
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            TangentSpace::Zero { ambient_dim }
            | TangentSpace::Full { ambient_dim }
            | TangentSpace::AxisAligned { ambient_dim, .. } => *ambient_dim,
            TangentSpace::General { basis } => basis.ncols(),
        }
    }

    /// The Hausdorff dimension of the support at this point.
    pub fn dimension(&self) -> usize {
        match self {
            TangentSpace::Zero { .. } => 0,
            TangentSpace::Full { ambient_dim } => *ambient_dim,
            TangentSpace::AxisAligned { mask, .. } => mask.iter().filter(|m| **m).count(),
            TangentSpace::General { basis } => basis.nrows(),
        }
    }

    /// `log sqrt(det(V V^T))`: the log `d`-volume of the basis
    /// parallelepiped. Zero for the implicit orthonormal bases (the empty
    /// basis has Gram determinant vacuously 1).
    pub fn log_volume(&self) -> Result<f64> {
        match self {
            TangentSpace::Zero { .. }
            | TangentSpace::Full { .. }
            | TangentSpace::AxisAligned { .. } => Ok(0.0),
            TangentSpace::General { basis } => gram_log_sqrt_det(basis),
        }
    }

    /// The rows of the basis as an explicit matrix (standard-basis subsets
    /// for the implicit variants).
    pub fn basis_matrix(&self) -> DMatrix<f64> {
        match self {
            TangentSpace::Zero { ambient_dim } => DMatrix::zeros(0, *ambient_dim),
            TangentSpace::Full { ambient_dim } => DMatrix::identity(*ambient_dim, *ambient_dim),
            TangentSpace::AxisAligned { ambient_dim, mask } => {
                let rows: Vec<usize> =
                    mask.iter().enumerate().filter(|(_, m)| **m).map(|(i, _)| i).collect();
                DMatrix::from_fn(rows.len(), *ambient_dim, |i, j| {
                    if rows[i] == j {
                        1.0
                    } else {
                        0.0
                    }
                })
            }
            TangentSpace::General { basis } => basis.clone(),
        }
    }
}

/// `log sqrt(det(V V^T))` for a `d x n` row-basis matrix, computed through a
/// Cholesky factorization of the Gram matrix. Degenerate bases (including
/// failed factorizations) are an error.
fn gram_log_sqrt_det(basis: &DMatrix<f64>) -> Result<f64> {
    let d = basis.nrows();
    if d == 0 {
        return Ok(0.0);
    }
    if basis.iter().any(|c| !c.is_finite()) {
        return Err(Error::DegenerateBasis("basis has non-finite entries".into()));
    }
    // Threshold in log scale so near-zero volumes never underflow.
    let log_row_norms: f64 = basis.row_iter().map(|r| r.norm().ln()).sum();
    let threshold = RANK_TOLERANCE.ln() + log_row_norms;

    let gram = basis * basis.transpose();
    let chol = gram.cholesky().ok_or_else(|| {
        Error::DegenerateBasis(format!("Gram matrix of a {d}-row basis is not positive definite"))
    })?;
    let log_sqrt_det: f64 = chol.l().diagonal().iter().map(|l| l.ln()).sum();
    if !log_sqrt_det.is_finite() || log_sqrt_det < threshold {
        return Err(Error::DegenerateBasis(format!(
            "log sqrt Gram determinant {log_sqrt_det} below scale-aware tolerance {threshold}"
        )));
    }
    Ok(log_sqrt_det)
}

/// Result of propagating a tangent space through a bijector: the pushed
/// tangent and the log-scale density correction
/// `log sqrt(det(V V^T)) - log sqrt(det(V' V'^T))`.
///
/// This is the single dispatch point; [`pushforward_tangent`] and
/// [`volume_correction`] are views of it.
pub fn push_with_correction<B: Bijector + ?Sized>(
    b: &B,
    x: &[f64],
    t: &TangentSpace,
) -> Result<(TangentSpace, f64)> {
    let n = b.domain_dim();
    let m = b.codomain_dim();
    if t.ambient_dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: t.ambient_dim(),
        });
    }
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.len() });
    }

    match t {
        // Discrete support: nothing to push, both Gram determinants are 1.
        TangentSpace::Zero { .. } => Ok((TangentSpace::zero(m), 0.0)),

        // Full support through a same-dimension diffeomorphism stays full;
        // sqrt(det(V'V'^T)) = |det J|, so use the logdet hook when present.
        TangentSpace::Full { .. } if m == n => {
            if let Some(logdet) = b.jacobian_logdet(x) {
                if !logdet.is_finite() && logdet != f64::NEG_INFINITY {
                    return Err(Error::NonFiniteDerivative(format!(
                        "jacobian log-determinant at x = {x:?} is {logdet}"
                    )));
                }
                Ok((TangentSpace::full(m), -logdet))
            } else {
                let (_, correction) = push_general(b, x, t)?;
                Ok((TangentSpace::full(m), correction))
            }
        }

        // Coordinatewise maps keep axis-aligned sparsity; the correction is
        // the product of the masked-in partial derivatives.
        TangentSpace::AxisAligned { mask, .. } if b.is_coordinatewise() => {
            let mut correction = 0.0;
            let mut all_partials = true;
            for (i, on) in mask.iter().enumerate() {
                if !on {
                    continue;
                }
                match b.partial_derivative(x, i) {
                    Some(p) if p.is_finite() && p != 0.0 => correction -= p.abs().ln(),
                    Some(p) if p == 0.0 => {
                        return Err(Error::DegenerateBasis(format!(
                            "partial derivative of coordinate {i} vanishes at x = {x:?}"
                        )))
                    }
                    Some(p) => {
                        return Err(Error::NonFiniteDerivative(format!(
                            "partial derivative of coordinate {i} at x = {x:?} is {p}"
                        )))
                    }
                    None => {
                        all_partials = false;
                        break;
                    }
                }
            }
            if all_partials {
                Ok((
                    TangentSpace::AxisAligned { ambient_dim: m, mask: mask.clone() },
                    correction,
                ))
            } else {
                push_general(b, x, t)
            }
        }

        // Everything else goes through the two-Gram-determinant formula.
        _ => push_general(b, x, t),
    }
}

/// General path: push every basis row by a JVP and take the ratio of Gram
/// volumes. Works for any variant (the implicit bases are materialized).
fn push_general<B: Bijector + ?Sized>(
    b: &B,
    x: &[f64],
    t: &TangentSpace,
) -> Result<(TangentSpace, f64)> {
    let m = b.codomain_dim();
    let basis = t.basis_matrix();
    let d = basis.nrows();
    let log_vol = t.log_volume()?;

    let mut pushed = DMatrix::zeros(d, m);
    let mut row = vec![0.0; basis.ncols()];
    for i in 0..d {
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = basis[(i, j)];
        }
        let v = b.jvp(x, &row)?;
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteDerivative(format!(
                "pushed basis vector {i} at x = {x:?} has non-finite entries"
            )));
        }
        for (j, vj) in v.iter().enumerate() {
            pushed[(i, j)] = *vj;
        }
    }

    let log_vol_pushed = gram_log_sqrt_det(&pushed)?;
    Ok((TangentSpace::General { basis: pushed }, log_vol - log_vol_pushed))
}

/// The tangent space at `f(x)` spanned by the directional derivatives of the
/// basis of `t`, with the variant chosen by dispatch (sparsity-preserving
/// cases keep their cheap representation).
pub fn pushforward_tangent<B: Bijector + ?Sized>(
    b: &B,
    x: &[f64],
    t: &TangentSpace,
) -> Result<TangentSpace> {
    push_with_correction(b, x, t).map(|(pushed, _)| pushed)
}

/// Log-scale multiplicative density correction for pushing a density
/// through `b` at `x`:
/// `log sqrt(det(V V^T)) - log sqrt(det(V' V'^T))`.
pub fn volume_correction<B: Bijector + ?Sized>(
    b: &B,
    x: &[f64],
    t: &TangentSpace,
) -> Result<f64> {
    push_with_correction(b, x, t).map(|(_, correction)| correction)
}

/// Whether two tangent spaces at the same ambient dimension span the same
/// subspace within a relative tolerance.
pub fn spans_equal(a: &TangentSpace, b: &TangentSpace, tol: f64) -> bool {
    if a.ambient_dim() != b.ambient_dim() || a.dimension() != b.dimension() {
        return false;
    }
    if a.dimension() == 0 {
        return true;
    }
    let rows_a = a.basis_matrix();
    let basis_b = b.basis_matrix();
    // Orthonormal columns spanning b's row space.
    let q = basis_b.transpose().qr().q();
    for i in 0..rows_a.nrows() {
        let v = rows_a.row(i).transpose();
        let residual = &v - &q * (q.transpose() * &v);
        if residual.norm() > tol * v.norm() {
            return false;
        }
    }
    true
}
