//! Truncated isometric lifts.
//!
//! A lift lives on `H ⊕ E ⊕ E ⊕ … ⊕ E` (finitely many defect levels). The
//! levels beyond the last one are invariant for the infinite construction, so
//! cutting them off is a compression to a co-invariant subspace: products of
//! the truncated matrices are the truncations of the products. What the
//! truncation does break is isometry near the last levels; all isometry
//! statements are therefore made on the protected range, `H` plus all but the
//! last four levels.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    check_tetrablock_isometry, fundamental_operators, make_triple, CommutingTriple, ConditionEntry, ConditionReport,
    IsometryCheckOptions, IsometryReport,
};
use crate::error::{Error, Result};
use crate::operator_core::{
    commutator, defect, extend_isometry_to_unitary, identity, op_norm, serde_matrix, ComplexMatrix, Subspace,
    ToleranceConfig,
};

/// Levels at the top of the tower on which isometry is not claimed.
const UNPROTECTED_LEVELS: usize = 4;

/// Single-operator lift on `H ⊕ D_T^N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SzNagyLift {
    #[serde(with = "serde_matrix")]
    pub v: ComplexMatrix,
    #[serde(with = "serde_matrix")]
    pub embed: ComplexMatrix,
    pub levels: usize,
    pub level_dim: usize,
}

/// `V = [[T, 0, …], [D, 0, …], [0, I, 0, …], …]` with `D` the defect
/// operator in defect-space coordinates. `V*` agrees with `T*` on `H`, and
/// `V*V = I` except on the last level.
pub fn sz_nagy_lift(t: &ComplexMatrix, levels: usize, tol: &ToleranceConfig) -> Result<SzNagyLift> {
    if levels == 0 {
        return Err(Error::InvalidConfig("a lift needs at least one level".into()));
    }
    let d = defect(t, tol)?;
    let q = d.space.basis();
    let (n, k) = (t.nrows(), q.ncols());
    let size = n + levels * k;
    let mut v = ComplexMatrix::zeros(size, size);
    v.view_mut((0, 0), (n, n)).copy_from(t);
    v.view_mut((n, 0), (k, n)).copy_from(&(q.adjoint() * &d.operator));
    for level in 1..levels {
        let (row, col) = (n + level * k, n + (level - 1) * k);
        v.view_mut((row, col), (k, k)).copy_from(&identity(k));
    }
    Ok(SzNagyLift {
        v,
        embed: coordinate_embedding(size, n),
        levels,
        level_dim: k,
    })
}

impl SzNagyLift {
    /// `max_{k ≤ degree} ‖embed* V^k embed - T^k‖`.
    pub fn verify_powers(&self, t: &ComplexMatrix, degree: usize) -> f64 {
        let mut lifted = self.embed.clone();
        let mut power = identity(t.nrows());
        let mut worst: f64 = 0.0;
        for _ in 0..=degree {
            worst = worst.max(op_norm(&(self.embed.adjoint() * &lifted - &power)));
            lifted = &self.v * lifted;
            power = t * power;
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftDiagnostics {
    /// `‖V1 V2 - V2 V1‖` on the whole truncated space.
    pub commutation: f64,
    /// `‖(Vi*Vi - I) P‖` with `P` the protected range.
    pub isometry_v1: f64,
    pub isometry_v2: f64,
    pub isometry_v: f64,
    /// `max_i ‖Vi* embed - embed Ti*‖`.
    pub lift_property: f64,
    /// `‖A1*A1 - A2*A2‖` for the two correspondence maps.
    pub pairing_identity: f64,
    /// An odd level count was raised by one so pairs of levels tile the tower.
    pub padded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftResult {
    #[serde(with = "serde_matrix")]
    pub v1: ComplexMatrix,
    #[serde(with = "serde_matrix")]
    pub v2: ComplexMatrix,
    #[serde(with = "serde_matrix")]
    pub v: ComplexMatrix,
    #[serde(with = "serde_matrix")]
    pub embed: ComplexMatrix,
    pub levels: usize,
    pub level_dim: usize,
    pub protected_degree: usize,
    pub diagnostics: LiftDiagnostics,
}

impl LiftResult {
    pub fn space_dim(&self) -> usize {
        self.v.nrows()
    }

    pub fn base_dim(&self) -> usize {
        self.embed.ncols()
    }

    /// Orthonormal columns spanning `H` and the protected levels.
    pub fn protected_range(&self) -> ComplexMatrix {
        let kept = self.base_dim() + self.levels.saturating_sub(UNPROTECTED_LEVELS) * self.level_dim;
        coordinate_embedding(self.space_dim(), kept)
    }
}

fn coordinate_embedding(size: usize, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(size, n, |i, j| if i == j { 1.0.into() } else { 0.0.into() })
}

/// Commuting isometric lift of a commuting contraction pair.
///
/// Each level is `E = D_{T1} ⊕ D_{T2}`. The naive lifts `Wi` write the
/// defect of `Ti` into the first level and shift the rest up by one. The
/// unitary `G` on `E ⊕ E` takes `(D1 T2 h, 0, 0, D2 h)` to
/// `(0, D2 T1 h, D1 h, 0)`, and acting on consecutive pairs of levels it turns
/// `V1 = G W1`, `V2 = W2 G*` into a commuting pair.
pub fn ando_lift(t1: &ComplexMatrix, t2: &ComplexMatrix, levels: usize, tol: &ToleranceConfig) -> Result<LiftResult> {
    if levels == 0 {
        return Err(Error::InvalidConfig("a lift needs at least one level".into()));
    }
    let pair = make_triple(t1.clone(), t2.clone(), t1 * t2, tol)?;
    let (d1, d2) = (defect(t1, tol)?, defect(t2, tol)?);
    let delta1 = d1.space.basis().adjoint() * &d1.operator;
    let delta2 = d2.space.basis().adjoint() * &d2.operator;
    let (n, k1, k2) = (t1.nrows(), delta1.nrows(), delta2.nrows());
    let e = k1 + k2;

    // Correspondence maps H -> E ⊕ E.
    let mut a1 = ComplexMatrix::zeros(2 * e, n);
    a1.view_mut((0, 0), (k1, n)).copy_from(&(&delta1 * t2));
    a1.view_mut((e + k1, 0), (k2, n)).copy_from(&delta2);
    let mut a2 = ComplexMatrix::zeros(2 * e, n);
    a2.view_mut((k1, 0), (k2, n)).copy_from(&(&delta2 * t1));
    a2.view_mut((e, 0), (k1, n)).copy_from(&delta1);
    let pairing_identity = op_norm(&(a1.adjoint() * &a1 - a2.adjoint() * &a2));
    if pairing_identity > 10.0 * tol.residual_tol {
        return Err(Error::PairingNotIsometric {
            residual: pairing_identity,
        });
    }
    let g = pairing_unitary(&a1, &a2, tol)?;

    let padded = levels % 2 == 1;
    let levels = levels + usize::from(padded);
    let size = n + levels * e;
    let naive = |t: &ComplexMatrix, delta: &ComplexMatrix, offset: usize| {
        let mut w = ComplexMatrix::zeros(size, size);
        w.view_mut((0, 0), (n, n)).copy_from(t);
        w.view_mut((n + offset, 0), (delta.nrows(), n)).copy_from(delta);
        for level in 1..levels {
            let (row, col) = (n + level * e, n + (level - 1) * e);
            w.view_mut((row, col), (e, e)).copy_from(&identity(e));
        }
        w
    };
    let w1 = naive(t1, &delta1, 0);
    let w2 = naive(t2, &delta2, k1);
    let mut g_hat = identity(size);
    for pair_index in 0..levels / 2 {
        let start = n + 2 * pair_index * e;
        g_hat.view_mut((start, start), (2 * e, 2 * e)).copy_from(&g);
    }
    let v1 = &g_hat * &w1;
    let v2 = &w2 * g_hat.adjoint();
    let v = &v1 * &v2;
    let embed = coordinate_embedding(size, n);

    let mut lift = LiftResult {
        v1,
        v2,
        v,
        embed,
        levels,
        level_dim: e,
        protected_degree: levels.saturating_sub(2),
        diagnostics: LiftDiagnostics {
            commutation: 0.0,
            isometry_v1: 0.0,
            isometry_v2: 0.0,
            isometry_v: 0.0,
            lift_property: 0.0,
            pairing_identity,
            padded,
        },
    };
    let protected = lift.protected_range();
    let isometry_defect = |m: &ComplexMatrix| op_norm(&((m.adjoint() * m - identity(size)) * &protected));
    lift.diagnostics.commutation = op_norm(&commutator(&lift.v1, &lift.v2));
    lift.diagnostics.isometry_v1 = isometry_defect(&lift.v1);
    lift.diagnostics.isometry_v2 = isometry_defect(&lift.v2);
    lift.diagnostics.isometry_v = isometry_defect(&lift.v);
    lift.diagnostics.lift_property = [(&lift.v1, &pair.t1), (&lift.v2, &pair.t2)]
        .iter()
        .map(|(vi, ti)| op_norm(&(vi.adjoint() * &lift.embed - &lift.embed * ti.adjoint())))
        .fold(0.0, f64::max);
    Ok(lift)
}

/// Unitary on `E ⊕ E` with `G A1 = A2`, given `A1*A1 = A2*A2`.
fn pairing_unitary(a1: &ComplexMatrix, a2: &ComplexMatrix, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
    let m = a1.nrows();
    if m == 0 || a1.ncols() == 0 {
        return Ok(identity(m));
    }
    // The left singular vectors are read off A1 w / σ: the ones returned by the
    // complex SVD can be unpaired with `v_t` when A1 is rank deficient.
    let svd = a1.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let sigma = &svd.singular_values;
    let cut = tol.rank_tol * sigma.max().max(1.0);
    let kept: Vec<usize> = (0..sigma.len()).filter(|&j| sigma[j] > cut).collect();
    if kept.is_empty() {
        return Ok(identity(m));
    }
    let mut sources = ComplexMatrix::zeros(m, kept.len());
    let mut images = ComplexMatrix::zeros(m, kept.len());
    for (col, &j) in kept.iter().enumerate() {
        let w = v_t.row(j).adjoint();
        sources.set_column(col, &((a1 * &w).unscale(sigma[j])));
        images.set_column(col, &((a2 * &w).unscale(sigma[j])));
    }
    let u1 = polar_factor(&sources);
    let u2 = polar_factor(&images);
    let domain = Subspace::from_orthonormal_columns(&u1);
    let codomain = Subspace::from_orthonormal_columns(&u2);
    extend_isometry_to_unitary(&domain, &codomain, &(&u2 * u1.adjoint()), tol)
}

/// Closest matrix with orthonormal columns.
fn polar_factor(m: &ComplexMatrix) -> ComplexMatrix {
    let svd = m.clone().svd(true, true);
    svd.u.expect("requested") * svd.v_t.expect("requested")
}

/// Andô lift of `(T1, T2)` viewed as a lift of the product triple `(T1, T2, T1 T2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductLift {
    pub lift: LiftResult,
    /// Isometry characterizations of `(V1, V2, V1 V2)` on the protected range.
    pub isometry: IsometryReport,
}

pub fn tetra_product_lift(
    t1: &ComplexMatrix,
    t2: &ComplexMatrix,
    levels: usize,
    tol: &ToleranceConfig,
) -> Result<ProductLift> {
    let lift = ando_lift(t1, t2, levels, tol)?;
    let lifted = CommutingTriple {
        commutator_residuals: [
            lift.diagnostics.commutation,
            op_norm(&commutator(&lift.v1, &lift.v)),
            op_norm(&commutator(&lift.v2, &lift.v)),
        ],
        t1: lift.v1.clone(),
        t2: lift.v2.clone(),
        t: lift.v.clone(),
    };
    let options = IsometryCheckOptions {
        restrict_to: Some(lift.protected_range()),
        falsifier: None,
    };
    let isometry = check_tetrablock_isometry(&lifted, tol, &options)?;
    Ok(ProductLift { lift, isometry })
}

/// `max ‖embed* q(V1, V2, V) embed - q(T1, T2, T)‖` over monomials of total
/// degree at most `degree`.
pub fn verify_lift(t: &CommutingTriple, lift: &LiftResult, degree: usize) -> Result<f64> {
    if degree > lift.protected_degree {
        return Err(Error::DegreeExceedsProtection {
            degree,
            protected: lift.protected_degree,
        });
    }
    if lift.base_dim() != t.dim() {
        return Err(Error::DimensionMismatch(format!(
            "lift embeds a {}-dimensional space, triple acts on {}",
            lift.base_dim(),
            t.dim()
        )));
    }
    let lifted = [&lift.v1, &lift.v2, &lift.v];
    let base = t.ops();
    // Layer by total degree; each monomial extends one of the previous layer.
    let mut layer: Vec<((usize, usize, usize), ComplexMatrix, ComplexMatrix)> =
        vec![((0, 0, 0), lift.embed.clone(), identity(t.dim()))];
    let mut worst: f64 = 0.0;
    for total in 0..=degree {
        worst = layer
            .par_iter()
            .map(|(_, up, down)| op_norm(&(lift.embed.adjoint() * up - down)))
            .reduce(|| worst, f64::max);
        if total == degree {
            break;
        }
        // Multiplying only by variables up to the first nonzero exponent
        // generates every monomial of the next degree exactly once.
        layer = layer
            .par_iter()
            .flat_map_iter(|((a, b, c), up, down)| {
                let first = if *a > 0 { 0 } else if *b > 0 { 1 } else { 2 };
                (0..=first).map(move |which| {
                    let key = match which {
                        0 => (a + 1, *b, *c),
                        1 => (*a, b + 1, *c),
                        _ => (*a, *b, c + 1),
                    };
                    (key, which, up, down)
                })
            })
            .map(|(key, which, up, down)| (key, lifted[which] * up, base[which] * down))
            .collect();
    }
    Ok(worst)
}

/// Blocks of the lift relative to `H ⊕ (K ⊖ H)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftDecomposition {
    #[serde(with = "serde_matrix")]
    pub c1: ComplexMatrix,
    #[serde(with = "serde_matrix")]
    pub c2: ComplexMatrix,
    #[serde(with = "serde_matrix")]
    pub c: ComplexMatrix,
    #[serde(with = "serde_matrix")]
    pub s1: ComplexMatrix,
    #[serde(with = "serde_matrix")]
    pub s2: ComplexMatrix,
    #[serde(with = "serde_matrix")]
    pub s: ComplexMatrix,
    /// Isometry from defect coordinates of `T` into `K ⊖ H` with `Λ D_T = C`.
    #[serde(with = "serde_matrix")]
    pub lambda: ComplexMatrix,
}

/// Degree at which a lift must verify before its blocks are analyzed.
pub const BLOCK_IDENTITY_DEGREE: usize = 2;

/// The block identities a tetrablock-isometric lift forces on `(T1, T2, T)`.
///
/// Identities involving `S` or `S_i` are evaluated on the protected levels.
pub fn lift_block_identities(
    t: &CommutingTriple,
    lift: &LiftResult,
    tol: &ToleranceConfig,
) -> Result<(ConditionReport, LiftDecomposition)> {
    let residual = verify_lift(t, lift, BLOCK_IDENTITY_DEGREE)?;
    if residual > tol.residual_tol {
        return Err(Error::LiftNotVerified {
            degree: BLOCK_IDENTITY_DEGREE,
            residual,
        });
    }
    let fp = fundamental_operators(t, tol)?;
    let embed = &lift.embed;
    let complement = Subspace::from_orthonormal_columns(embed).complement();
    let h_perp = complement.basis();
    let protected = h_perp.adjoint() * lift.protected_range();
    let lower = |v: &ComplexMatrix| (h_perp.adjoint() * v * embed, h_perp.adjoint() * v * h_perp);
    let (c1, s1) = lower(&lift.v1);
    let (c2, s2) = lower(&lift.v2);
    let (c, s) = lower(&lift.v);

    let q = fp.defect_basis.basis();
    let reduced = q.adjoint() * &fp.defect_operator * q;
    let lambda = &c * q * pseudo_inverse(&reduced, tol.rank_tol);
    let tolerance = tol.residual_tol;
    let mut report = ConditionReport::default();
    report.push(ConditionEntry::from_operator(
        "Lambda D = C",
        &(&lambda * q.adjoint() * &fp.defect_operator - &c),
        tolerance,
    ));
    report.push(ConditionEntry::from_operator(
        "Lambda* Lambda = I",
        &(lambda.adjoint() * &lambda - identity(lambda.ncols())),
        tolerance,
    ));
    report.push(ConditionEntry::from_operator(
        "T1 - T2*T = C2* C",
        &(&t.t1 - t.t2.adjoint() * &t.t - c2.adjoint() * &c),
        tolerance,
    ));
    report.push(ConditionEntry::from_operator("C2* S = 0", &(c2.adjoint() * &s * &protected), tolerance));
    report.push(ConditionEntry::from_operator("C1 = S2* C", &(&c1 - s2.adjoint() * &c), tolerance));
    report.push(ConditionEntry::from_operator(
        "T2 - T1*T = C1* C",
        &(&t.t2 - t.t1.adjoint() * &t.t - c1.adjoint() * &c),
        tolerance,
    ));
    report.push(ConditionEntry::from_operator("C1* S = 0", &(c1.adjoint() * &s * &protected), tolerance));
    report.push(ConditionEntry::from_operator("C2 = S1* C", &(&c2 - s1.adjoint() * &c), tolerance));
    report.push(ConditionEntry::from_operator(
        "C1 T2 + S1 C2 = C2 T1 + S2 C1",
        &(&c1 * &t.t2 + &s1 * &c2 - &c2 * &t.t1 - &s2 * &c1),
        tolerance,
    ));
    report.push(ConditionEntry::from_operator(
        "F1 = Lambda* S1 Lambda",
        &(&fp.f1 - lambda.adjoint() * &s1 * &lambda),
        tolerance,
    ));
    report.push(ConditionEntry::from_operator(
        "F2 = Lambda* S2 Lambda",
        &(&fp.f2 - lambda.adjoint() * &s2 * &lambda),
        tolerance,
    ));
    Ok((
        report,
        LiftDecomposition {
            c1,
            c2,
            c,
            s1,
            s2,
            s,
            lambda,
        },
    ))
}

/// Pseudoinverse of a Hermitian matrix, eigenvalues at or below `cut` dropped.
fn pseudo_inverse(h: &ComplexMatrix, cut: f64) -> ComplexMatrix {
    if h.nrows() == 0 {
        return h.clone();
    }
    let (values, vectors) = match crate::operator_core::hermitian_eigen(h) {
        Ok(pair) => pair,
        Err(_) => return ComplexMatrix::zeros(h.nrows(), h.ncols()),
    };
    let mut scaled = vectors.clone();
    for (j, &lambda) in values.iter().enumerate() {
        let factor = if lambda.abs() > cut { 1.0 / lambda } else { 0.0 };
        scaled.column_mut(j).scale_mut(factor);
    }
    scaled * vectors.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator_core::{c64, from_real_rows, zeros};

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn sz_nagy_of_zero_is_truncated_shift() {
        let lift = sz_nagy_lift(&zeros(1, 1), 4, &tol()).unwrap();
        let shift = ComplexMatrix::from_fn(5, 5, |i, j| if i == j + 1 { c64(1.0, 0.0) } else { c64(0.0, 0.0) });
        assert_eq!(lift.v, shift);
    }

    #[test]
    fn sz_nagy_of_isometry_is_itself() {
        let u = from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let lift = sz_nagy_lift(&u, 3, &tol()).unwrap();
        assert_eq!(lift.level_dim, 0);
        assert_eq!(lift.v, u);
    }

    #[test]
    fn scalar_pair_lift_is_exact() {
        let lift = ando_lift(&zeros(1, 1), &zeros(1, 1), 4, &tol()).unwrap();
        assert_eq!(lift.space_dim(), 1 + 2 * 4);
        assert!(lift.diagnostics.commutation < 1e-14);
        assert!(lift.diagnostics.lift_property < 1e-14);
        assert!(lift.diagnostics.isometry_v < 1e-14);
    }

    #[test]
    fn odd_levels_are_padded() {
        let lift = ando_lift(&zeros(1, 1), &zeros(1, 1), 5, &tol()).unwrap();
        assert!(lift.diagnostics.padded);
        assert_eq!(lift.levels, 6);
    }

    #[test]
    fn degree_above_protection_is_rejected() {
        let t1 = ComplexMatrix::from_element(1, 1, c64(0.5, 0.0));
        let lift = ando_lift(&t1, &t1, 4, &tol()).unwrap();
        let triple = make_triple(t1.clone(), t1.clone(), &t1 * &t1, &tol()).unwrap();
        assert!(verify_lift(&triple, &lift, 2).unwrap() < 1e-14);
        assert!(matches!(
            verify_lift(&triple, &lift, 3),
            Err(Error::DegreeExceedsProtection { degree: 3, protected: 2 })
        ));
    }

    #[test]
    fn scalar_product_lift_block_identities() {
        let (b1, b2) = (c64(0.3, 0.2), c64(-0.5, 0.1));
        let s = |z| ComplexMatrix::from_element(1, 1, z);
        let product = tetra_product_lift(&s(b1), &s(b2), 8, &tol()).unwrap();
        assert!(product.isometry.is_isometry() && product.isometry.conditions_agree());
        let triple = make_triple(s(b1), s(b2), s(b1 * b2), &tol()).unwrap();
        let (report, _) = lift_block_identities(&triple, &product.lift, &tol()).unwrap();
        assert!(report.max_residual() < 1e-12, "{report:#?}");
    }
}
