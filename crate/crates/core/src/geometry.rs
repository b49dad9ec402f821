//! Scalar model: membership in the tetrablock and its distinguished boundary.
//!
//! A point `(x1, x2, x3)` lies in the tetrablock when it equals
//! `(a11, a22, det A)` for some 2×2 matrix with `‖A‖ < 1`. Conjugating by a
//! diagonal unitary keeps the diagonal, the determinant and the norm, so the
//! off-diagonal pair can be taken as `(r, c / r)` with `r > 0` and
//! `c = x1 x2 - x3`. Membership reduces to minimizing `‖A(r)‖` over one real
//! parameter.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator_core::{op_norm, ComplexMatrix, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TetraPoint {
    pub x1: Complex64,
    pub x2: Complex64,
    pub x3: Complex64,
}

impl TetraPoint {
    pub fn new(x1: Complex64, x2: Complex64, x3: Complex64) -> Self {
        Self { x1, x2, x3 }
    }

    /// `(a11, a22, det A)`.
    pub fn from_matrix(a: &ComplexMatrix) -> Self {
        Self {
            x1: a[(0, 0)],
            x2: a[(1, 1)],
            x3: a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)],
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.x1, self.x2, self.x3].iter().all(|z| z.is_finite())
    }
}

/// Verdict of [`in_tetrablock`] with the norm-minimizing witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub member: bool,
    pub witness_norm: f64,
    #[serde(with = "crate::operator_core::serde_matrix")]
    pub witness: ComplexMatrix,
}

const BRACKET_DECADES: i32 = 8;
const BRACKET_STEPS_PER_DECADE: i32 = 4;
const GOLDEN_ITERATIONS: usize = 100;

/// Searches for the smallest-norm 2×2 matrix realizing `p`.
///
/// Open membership requires a witness with norm below `1 - tol`, closed
/// membership one with norm at most `1 + tol`.
pub fn in_tetrablock(p: &TetraPoint, closed: bool, tol: f64) -> Result<Membership> {
    if !p.is_finite() {
        return Err(Error::SearchFailed("point has non-finite coordinates".into()));
    }
    let c = p.x1 * p.x2 - p.x3;
    let (r, witness_norm) = if c.norm() <= tol {
        // Triangular witnesses: a12 = 0 with a21 = c, or a12 = c with a21 = 0.
        // Both have the same norm.
        (0.0, norm_2x2(p.x1, ZERO, c, p.x2))
    } else {
        minimize_over_r(p, c)?
    };
    let witness = if r == 0.0 {
        ComplexMatrix::from_row_slice(2, 2, &[p.x1, ZERO, c, p.x2])
    } else {
        ComplexMatrix::from_row_slice(2, 2, &[p.x1, Complex64::new(r, 0.0), c / r, p.x2])
    };
    let member = if closed {
        witness_norm <= 1.0 + tol
    } else {
        witness_norm < 1.0 - tol
    };
    Ok(Membership {
        member,
        witness_norm,
        witness,
    })
}

/// Log-spaced bracketing around `sqrt|c|`, then golden section in `log r`.
fn minimize_over_r(p: &TetraPoint, c: Complex64) -> Result<(f64, f64)> {
    let f = |t: f64| {
        let r = t.exp();
        norm_2x2(p.x1, Complex64::new(r, 0.0), c / r, p.x2)
    };
    let centre = 0.5 * c.norm().ln();
    let step = std::f64::consts::LN_10 / BRACKET_STEPS_PER_DECADE as f64;
    let count = BRACKET_DECADES * BRACKET_STEPS_PER_DECADE;
    let mut best = (f64::INFINITY, 0);
    for k in -count..=count {
        let value = f(centre + k as f64 * step);
        if value < best.0 {
            best = (value, k);
        }
    }
    if !best.0.is_finite() {
        return Err(Error::SearchFailed("bracketing found no finite norm".into()));
    }
    let mid = centre + best.1 as f64 * step;
    let (mut lo, mut hi) = (mid - step, mid + step);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut t1 = hi - ratio * (hi - lo);
    let mut t2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(t1), f(t2));
    for _ in 0..GOLDEN_ITERATIONS {
        if f1 > f2 {
            lo = t1;
            t1 = t2;
            f1 = f2;
            t2 = lo + ratio * (hi - lo);
            f2 = f(t2);
        } else {
            hi = t2;
            t2 = t1;
            f2 = f1;
            t1 = hi - ratio * (hi - lo);
            f1 = f(t1);
        }
    }
    let (t, value) = [(t1, f1), (t2, f2), (mid, best.0)]
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty");
    if !value.is_finite() {
        return Err(Error::SearchFailed("golden section produced a non-finite norm".into()));
    }
    Ok((t.exp(), value))
}

/// Largest singular value of `M = [[a, b], [c, d]]`, from the eigenvalues of
/// `M M* = [[p, q], [conj q, r]]`; the discriminant is a sum of squares, so
/// unitary witnesses come out at one to rounding.
fn norm_2x2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> f64 {
    let p = a.norm_sqr() + b.norm_sqr();
    let r = c.norm_sqr() + d.norm_sqr();
    let q = a * c.conj() + b * d.conj();
    let half_gap = 0.5 * (p - r);
    (0.5 * (p + r) + half_gap.hypot(q.norm())).sqrt()
}

/// `x1 = conj(x2) x3`, `|x2| ≤ 1`, `|x3| = 1`, each within `tol`.
pub fn in_distinguished_boundary(p: &TetraPoint, tol: f64) -> bool {
    p.is_finite()
        && (p.x1 - p.x2.conj() * p.x3).norm() <= tol
        && p.x2.norm() <= 1.0 + tol
        && (p.x3.norm() - 1.0).abs() <= tol
}

/// `n` images `(a11, a22, det A)` of random 2×2 matrices with `‖A‖ < 1`.
pub fn sample_tetrablock(n: usize, seed: u64) -> Vec<TetraPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let a = ComplexMatrix::from_fn(2, 2, |_, _| gaussian(&mut rng));
            let norm = op_norm(&a);
            // Radius weighted towards the boundary, where sup norms are attained.
            let radius = rng.random::<f64>().powf(0.25) * (1.0 - 1e-6);
            TetraPoint::from_matrix(&(a * Complex64::new(radius / norm, 0.0)))
        })
        .collect()
}

/// Points `(conj(β) u, β, u)` with `|u| = 1`; half of them have `|β| = 1`.
pub fn sample_distinguished_boundary(n: usize, seed: u64) -> Vec<TetraPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|k| {
            let u = Complex64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU);
            let modulus = if k % 2 == 0 { 1.0 } else { rng.random::<f64>().sqrt() };
            let beta = Complex64::from_polar(modulus, rng.random::<f64>() * std::f64::consts::TAU);
            TetraPoint::new(beta.conj() * u, beta, u)
        })
        .collect()
}

pub(crate) fn gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator_core::c64;

    /// Dense grid over `(log r, phase)` with spacing 1e-4 in `log r`, norms
    /// from a full SVD.
    fn grid_oracle(p: &TetraPoint) -> f64 {
        let c = p.x1 * p.x2 - p.x3;
        let mut best = f64::INFINITY;
        for i in 0..=80_000 {
            let r = (-4.0 + 8.0 * i as f64 / 80_000.0).exp();
            for j in 0..8 {
                let phase = Complex64::from_polar(1.0, j as f64 * std::f64::consts::TAU / 8.0);
                let a = ComplexMatrix::from_row_slice(2, 2, &[p.x1, phase * r, c / (phase * r), p.x2]);
                best = best.min(op_norm(&a));
            }
        }
        best
    }

    #[test]
    fn origin_is_inside() {
        let m = in_tetrablock(&TetraPoint::new(ZERO, ZERO, ZERO), false, 1e-9).unwrap();
        assert!(m.member);
        assert_eq!(m.witness_norm, 0.0);
        assert!(m.witness.iter().all(|z| *z == ZERO));
    }

    #[test]
    fn boundary_point_is_only_in_closure() {
        let p = TetraPoint::new(c64(0.5, 0.0), c64(0.5, 0.0), c64(1.0, 0.0));
        let open = in_tetrablock(&p, false, 1e-9).unwrap();
        let closed = in_tetrablock(&p, true, 1e-9).unwrap();
        assert!(!open.member && closed.member);
        assert!((closed.witness_norm - 1.0).abs() < 1e-9);
        assert!((closed.witness_norm - grid_oracle(&p)).abs() < 1e-4);
        assert!((TetraPoint::from_matrix(&closed.witness).x3 - p.x3).norm() < 1e-12);
    }

    #[test]
    fn witness_realizes_point() {
        let p = TetraPoint::new(c64(0.2, -0.1), c64(-0.3, 0.4), c64(0.1, 0.05));
        let m = in_tetrablock(&p, false, 1e-9).unwrap();
        let back = TetraPoint::from_matrix(&m.witness);
        assert!((back.x1 - p.x1).norm() + (back.x2 - p.x2).norm() + (back.x3 - p.x3).norm() < 1e-12);
        assert!((m.witness_norm - op_norm(&m.witness)).abs() < 1e-12);
        assert!((m.witness_norm - grid_oracle(&p)).abs() < 1e-6);
    }

    #[test]
    fn degenerate_branch() {
        let p = TetraPoint::new(c64(0.5, 0.0), c64(0.0, 0.7), c64(0.0, 0.35));
        let m = in_tetrablock(&p, false, 1e-9).unwrap();
        assert!(m.member);
        assert!((m.witness_norm - 0.7).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_finite() {
        let p = TetraPoint::new(c64(f64::NAN, 0.0), ZERO, ZERO);
        assert!(matches!(in_tetrablock(&p, true, 1e-9), Err(Error::SearchFailed(_))));
    }

    #[test]
    fn distinguished_boundary_examples() {
        let half = c64(0.5, 0.0);
        assert!(in_distinguished_boundary(&TetraPoint::new(half, half, c64(1.0, 0.0)), 1e-12));
        assert!(in_distinguished_boundary(&TetraPoint::new(ZERO, ZERO, c64(1.0, 0.0)), 1e-12));
        assert!(!in_distinguished_boundary(&TetraPoint::new(half, half, c64(0.9, 0.0)), 1e-12));
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(sample_tetrablock(5, 3), sample_tetrablock(5, 3));
        assert_ne!(sample_tetrablock(5, 3), sample_tetrablock(5, 4));
        assert!(sample_tetrablock(0, 1).is_empty());
    }
}
