use std::f64::consts::TAU;

use num_complex::Complex64;

use super::{ensure_square, ComplexMatrix};
use crate::error::Result;

const GOLDEN_ITERATIONS: usize = 60;

/// Lower bound for the numerical radius `w(A) = max_θ λ_max(Re(e^{iθ} A))`.
///
/// Scans `grid_points` equally spaced angles, then refines around the best
/// one by golden-section search. The estimate increases towards `w(A)` as the
/// grid is refined.
pub fn numerical_radius(a: &ComplexMatrix, grid_points: usize) -> Result<f64> {
    numerical_radius_above(a, grid_points, f64::NEG_INFINITY)
}

/// Same scan as [`numerical_radius`], but allowed to stop early once the
/// result is known to lie below `floor`.
///
/// Returns the exact (refined) scan value whenever that value is at least
/// `floor`; otherwise returns some value strictly below `floor`. Skipping is
/// exact: `θ ↦ λ_max(Re(e^{iθ} A))` is Lipschitz with constant `‖A‖`, bounded
/// here by the Frobenius norm, so a skipped angle can never beat the current
/// best.
pub fn numerical_radius_above(a: &ComplexMatrix, grid_points: usize, floor: f64) -> Result<f64> {
    let n = ensure_square(a)?;
    if n == 0 {
        return Ok(0.0);
    }
    let lipschitz = a.norm();
    if lipschitz == 0.0 {
        return Ok(0.0);
    }
    let pencil = Pencil::new(a);
    let grid_points = grid_points.max(1);
    let step = TAU / grid_points as f64;

    let mut best = f64::NEG_INFINITY;
    let mut best_index = 0;
    let mut j = 0;
    while j < grid_points {
        let value = pencil.top_eigenvalue(j as f64 * step);
        if value > best {
            best = value;
            best_index = j;
        }
        let threshold = best.max(floor);
        let skip = ((threshold - value) / (lipschitz * step)).floor();
        j += 1 + if skip > 0.0 { skip as usize } else { 0 };
    }

    // A refined value can exceed the grid value by at most half a step times ‖A‖.
    if best + 0.5 * lipschitz * step < floor {
        return Ok(best);
    }
    let centre = best_index as f64 * step;
    let refined = golden_max(|t| pencil.top_eigenvalue(t), centre - step, centre + step);
    Ok(best.max(refined))
}

/// `Re(e^{iθ}A) = cos θ · H₁ + sin θ · H₂` with Hermitian `H₁, H₂`.
struct Pencil {
    cos_part: ComplexMatrix,
    sin_part: ComplexMatrix,
}

impl Pencil {
    fn new(a: &ComplexMatrix) -> Self {
        let adj = a.adjoint();
        let cos_part = (a + &adj).scale(0.5);
        let sin_part = (a - &adj) * Complex64::new(0.0, 0.5);
        Self { cos_part, sin_part }
    }

    fn top_eigenvalue(&self, theta: f64) -> f64 {
        let h = self.cos_part.scale(theta.cos()) + self.sin_part.scale(theta.sin());
        if h.nrows() == 1 {
            return h[(0, 0)].re;
        }
        h.symmetric_eigenvalues().max()
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..GOLDEN_ITERATIONS {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        }
    }
    f1.max(f2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator_core::{c64, from_real_rows, identity, op_norm, spectral_radius};

    /// Plain dense sweep without skipping or refinement.
    fn dense_sweep(a: &ComplexMatrix, points: usize) -> f64 {
        let p = Pencil::new(a);
        (0..points)
            .map(|k| p.top_eigenvalue(TAU * k as f64 / points as f64))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn scalar_radius_is_modulus() {
        let a = ComplexMatrix::from_element(1, 1, c64(0.3, -0.4));
        assert!((numerical_radius(&a, 360).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn nilpotent_two_by_two() {
        // Re(e^{iθ}A) has eigenvalues ±1/2 for every θ.
        let a = from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let dense = dense_sweep(&a, 4096);
        assert!((dense - 0.5).abs() < 1e-12);
        assert!((numerical_radius(&a, 360).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn normal_matrix_radius_is_spectral_radius() {
        let a = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c64(0.2, 0.1),
            c64(-0.7, 0.3),
            c64(0.0, 0.5),
        ]));
        let w = numerical_radius(&a, 360).unwrap();
        assert!((w - spectral_radius(&a).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn truncated_shift_radius_matches_cosine_formula() {
        for n in [3usize, 5, 9] {
            let s = ComplexMatrix::from_fn(n, n, |i, j| if i == j + 1 { c64(1.0, 0.0) } else { c64(0.0, 0.0) });
            let expected = (std::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert!((numerical_radius(&s, 360).unwrap() - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn skipping_agrees_with_dense_sweep() {
        let a = ComplexMatrix::from_fn(5, 5, |i, j| c64(((i * 7 + j * 3) % 5) as f64 - 2.0, (i as f64 - j as f64) * 0.3));
        let grid = 97;
        let dense = dense_sweep(&a, grid);
        let scanned = numerical_radius(&a, grid).unwrap();
        assert!(scanned >= dense - 1e-12);
        assert!(scanned <= dense + 0.5 * a.norm() * TAU / grid as f64);
        // A floor above the answer reports "below floor".
        assert!(numerical_radius_above(&a, grid, scanned + 1.0).unwrap() < scanned + 1.0);
        assert_eq!(numerical_radius_above(&a, grid, scanned - 0.5).unwrap(), scanned);
        assert!(op_norm(&a) + 1e-12 >= scanned && 2.0 * scanned + 1e-12 >= op_norm(&a));
        let _ = identity(1);
    }
}
