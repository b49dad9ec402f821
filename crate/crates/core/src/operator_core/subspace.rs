use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{identity, op_norm, zeros, ComplexMatrix};

/// Subspace of `C^n` held as a matrix with orthonormal columns.
///
/// Bases are canonicalized: the projector onto the subspace is reduced by
/// column-pivoted Gram-Schmidt, lowest column index first on ties. A
/// coordinate-aligned subspace therefore gets standard basis vectors in
/// increasing order, which keeps operator blocks readable in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subspace {
    ambient_dim: usize,
    #[serde(with = "super::serde_matrix")]
    basis: ComplexMatrix,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: zeros(ambient_dim, 0),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: identity(ambient_dim),
        }
    }

    /// Span of the given orthonormal columns, rebased canonically.
    pub fn from_orthonormal_columns(columns: &ComplexMatrix) -> Self {
        let projector = columns * columns.adjoint();
        Self {
            ambient_dim: columns.nrows(),
            basis: canonical_basis(&projector, columns.ncols()),
        }
    }

    /// Range of an arbitrary matrix; singular values at or below
    /// `rank_tol * max(1, ‖m‖)` are treated as zero.
    pub fn range_of(m: &ComplexMatrix, rank_tol: f64) -> Self {
        let n = m.nrows();
        if m.ncols() == 0 || n == 0 {
            return Self::zero(n);
        }
        let svd = m.clone().svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let top = svd.singular_values.max();
        let cut = rank_tol * top.max(1.0);
        let kept: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&j| svd.singular_values[j] > cut)
            .collect();
        Self::from_orthonormal_columns(&u.select_columns(kept.iter()))
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn projector(&self) -> ComplexMatrix {
        &self.basis * self.basis.adjoint()
    }

    pub fn complement(&self) -> Subspace {
        let n = self.ambient_dim;
        let perp = identity(n) - self.projector();
        Subspace {
            ambient_dim: n,
            basis: canonical_basis(&perp, n - self.dim()),
        }
    }

    /// `‖Q*Q - I‖` for the stored basis.
    pub fn orthonormality_residual(&self) -> f64 {
        op_norm(&(self.basis.adjoint() * &self.basis - identity(self.dim())))
    }
}

/// Orthonormal basis of the range of an orthogonal projector of known rank.
fn canonical_basis(projector: &ComplexMatrix, rank: usize) -> ComplexMatrix {
    let n = projector.nrows();
    let mut residuals: Vec<DVector<Complex64>> =
        (0..projector.ncols()).map(|j| projector.column(j).into_owned()).collect();
    let mut used = vec![false; residuals.len()];
    let mut basis: Vec<DVector<Complex64>> = Vec::with_capacity(rank);

    for _ in 0..rank {
        let norms: Vec<f64> = residuals
            .iter()
            .zip(&used)
            .map(|(v, &u)| if u { -1.0 } else { v.norm() })
            .collect();
        let top = norms.iter().copied().fold(0.0, f64::max);
        if top <= f64::EPSILON {
            break;
        }
        let pick = norms
            .iter()
            .position(|&v| v >= top * (1.0 - 1e-9))
            .expect("a column attains the maximum");
        used[pick] = true;

        let mut v = residuals[pick].clone();
        for _ in 0..2 {
            for b in &basis {
                let coef = b.dotc(&v);
                v -= b * coef;
            }
        }
        let norm = v.norm();
        v /= Complex64::new(norm, 0.0);
        for (k, r) in residuals.iter_mut().enumerate() {
            if !used[k] {
                let coef = v.dotc(r);
                *r -= &v * coef;
            }
        }
        basis.push(v);
    }

    let mut out = zeros(n, basis.len());
    for (j, b) in basis.iter().enumerate() {
        out.set_column(j, b);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator_core::{c64, from_real_rows};

    #[test]
    fn coordinate_subspace_gets_standard_basis() {
        let cols = from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0], &[1.0, 0.0]]);
        let s = Subspace::from_orthonormal_columns(&cols);
        let expected = from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        assert!(op_norm(&(s.basis() - expected)) < 1e-14);
    }

    #[test]
    fn complement_is_orthogonal() {
        let v = ComplexMatrix::from_fn(4, 2, |i, j| c64((i + 2 * j) as f64, (i * j) as f64 - 1.0));
        let s = Subspace::range_of(&v, 1e-9);
        assert_eq!(s.dim(), 2);
        let perp = s.complement();
        assert_eq!(perp.dim(), 2);
        assert!(op_norm(&(s.basis().adjoint() * perp.basis())) < 1e-12);
        assert!(s.orthonormality_residual() < 1e-12);
        assert!(perp.orthonormality_residual() < 1e-12);
    }

    #[test]
    fn range_drops_null_directions() {
        let m = from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert_eq!(Subspace::range_of(&m, 1e-9).dim(), 1);
        assert_eq!(Subspace::range_of(&zeros(3, 2), 1e-9).dim(), 0);
    }
}
