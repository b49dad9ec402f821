//! Triples whose last member is a partial isometry.
//!
//! With respect to `Ran T* ⊕ Ker T`, a partial isometry has the form
//! `T = [[Y, 0], [X, 0]]` with `[Y; X]` an isometry, and the first two members
//! of a commuting triple split as `Ti = [[Ai, Bi], [Ci, Di]]`. Everything below
//! is reported in that ordered decomposition.

use serde::{Deserialize, Serialize};

use crate::analysis::{
    fundamental_operators, self_commutator_gap, CommutingTriple, ConditionEntry, FundamentalPair, ConditionReport, P1, P2,
};
use crate::error::{Error, Result};
use crate::operator_core::{commutator, hermitian_eigen, op_norm, serde_matrix, ComplexMatrix, Subspace, ToleranceConfig};

/// Eigenvalues of `T*T` at or below this value count as kernel. For a genuine
/// partial isometry they cluster at 0 and 1.
const KERNEL_CUT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialIsometryDecomposition {
    pub ker_t: Subspace,
    pub ran_tstar: Subspace,
    /// `K* T R`.
    #[serde(with = "serde_matrix")]
    pub x: ComplexMatrix,
    /// `R* T R`.
    #[serde(with = "serde_matrix")]
    pub y: ComplexMatrix,
    /// `‖T K‖`, the size of the second block column.
    pub second_column_residual: f64,
    /// `‖Z*Z - I‖` for `Z = [Y; X]`.
    pub z_isometry_residual: f64,
}

impl PartialIsometryDecomposition {
    /// Unitary `[R | K]` whose columns realize `Ran T* ⊕ Ker T`.
    pub fn change_of_basis(&self) -> ComplexMatrix {
        let (r, k) = (self.ran_tstar.basis(), self.ker_t.basis());
        let n = self.ker_t.ambient_dim();
        let mut w = ComplexMatrix::zeros(n, r.ncols() + k.ncols());
        w.columns_mut(0, r.ncols()).copy_from(r);
        w.columns_mut(r.ncols(), k.ncols()).copy_from(k);
        w
    }
}

pub fn decompose_partial_isometry(t: &ComplexMatrix, tol: &ToleranceConfig) -> Result<PartialIsometryDecomposition> {
    let residual = op_norm(&(t * t.adjoint() * t - t));
    if residual > tol.residual_tol {
        return Err(Error::NotPartialIsometry { residual });
    }
    let (values, vectors) = hermitian_eigen(&(t.adjoint() * t))?;
    let kernel: Vec<usize> = (0..values.len()).filter(|&j| values[j] <= KERNEL_CUT).collect();
    let ker_t = Subspace::from_orthonormal_columns(&vectors.select_columns(kernel.iter()));
    let ran_tstar = ker_t.complement();
    let (r, k) = (ran_tstar.basis(), ker_t.basis());
    let y = r.adjoint() * t * r;
    let x = k.adjoint() * t * r;
    let z = t * r;
    let z_isometry_residual = op_norm(&(z.adjoint() * &z - ComplexMatrix::identity(r.ncols(), r.ncols())));
    Ok(PartialIsometryDecomposition {
        second_column_residual: op_norm(&(t * k)),
        z_isometry_residual,
        ker_t,
        ran_tstar,
        x,
        y,
    })
}

/// `(D1, D2) = (T1, T2)` restricted to `Ker T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestrictionPair {
    #[serde(with = "serde_matrix")]
    pub d1: ComplexMatrix,
    #[serde(with = "serde_matrix")]
    pub d2: ComplexMatrix,
    /// `‖P_{Ran T*} Ti|_{Ker T}‖`.
    pub invariance_residuals: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialIsometryAnalysis {
    pub decomposition: PartialIsometryDecomposition,
    pub restriction: RestrictionPair,
    pub conditions: ConditionReport,
    /// (P2) and its restriction-pair form have the same verdict.
    pub p2_forms_agree: bool,
}

pub const P2_RESTRICTED: &str = "P2 for (D1, D2): D1*D1 - D1 D1* = D2*D2 - D2 D2*";

pub fn analyze_partial_isometry_triple(t: &CommutingTriple, tol: &ToleranceConfig) -> Result<PartialIsometryAnalysis> {
    let fp = fundamental_operators(t, tol)?;
    analyze_partial_isometry_with_pair(t, &fp, tol)
}

/// [`analyze_partial_isometry_triple`] with an already computed pair.
pub fn analyze_partial_isometry_with_pair(
    t: &CommutingTriple,
    fp: &FundamentalPair,
    tol: &ToleranceConfig,
) -> Result<PartialIsometryAnalysis> {
    let decomposition = decompose_partial_isometry(&t.t, tol)?;
    let (r, k) = (decomposition.ran_tstar.basis(), decomposition.ker_t.basis());
    let (x, y) = (&decomposition.x, &decomposition.y);
    let blocks = |ti: &ComplexMatrix| {
        (
            r.adjoint() * ti * r,
            r.adjoint() * ti * k,
            k.adjoint() * ti * r,
            k.adjoint() * ti * k,
        )
    };
    let (a1, b1, c1, d1) = blocks(&t.t1);
    let (a2, b2, c2, d2) = blocks(&t.t2);
    let (e1, e2) = fp.embedded();
    let tolerance = tol.residual_tol;
    let mut conditions = ConditionReport::default();

    conditions.push(ConditionEntry::from_operator("Ker T invariant under T1", &b1, tolerance));
    conditions.push(ConditionEntry::from_operator("Ker T invariant under T2", &b2, tolerance));
    conditions.push(ConditionEntry::from_operator(
        "F1 = 0 + D1",
        &(&e1 - k * &d1 * k.adjoint()),
        tolerance,
    ));
    conditions.push(ConditionEntry::from_operator(
        "F2 = 0 + D2",
        &(&e2 - k * &d2 * k.adjoint()),
        tolerance,
    ));
    conditions.push(ConditionEntry::from_operator(
        "A1 = A2* Y + C2* X",
        &(&a1 - (a2.adjoint() * y + c2.adjoint() * x)),
        tolerance,
    ));
    conditions.push(ConditionEntry::from_operator(
        "A2 = A1* Y + C1* X",
        &(&a2 - (a1.adjoint() * y + c1.adjoint() * x)),
        tolerance,
    ));
    conditions.push(ConditionEntry::from_operator("C1 = D2* X", &(&c1 - d2.adjoint() * x), tolerance));
    conditions.push(ConditionEntry::from_operator("C2 = D1* X", &(&c2 - d1.adjoint() * x), tolerance));
    conditions.push(ConditionEntry::from_operator(P1, &commutator(&fp.f1, &fp.f2), tolerance));
    conditions.push(ConditionEntry::from_operator(P2, &self_commutator_gap(&fp.f1, &fp.f2), tolerance));
    conditions.push(ConditionEntry::from_operator(P2_RESTRICTED, &self_commutator_gap(&d1, &d2), tolerance));

    // Reassemble Ti = W [[Ai, 0], [Ci, Fi]] W* with Fi read off the fundamental pair.
    let w = decomposition.change_of_basis();
    for (name, ti, ai, ci, ei) in [("reconstruct T1", &t.t1, &a1, &c1, &e1), ("reconstruct T2", &t.t2, &a2, &c2, &e2)] {
        let mut block = ComplexMatrix::zeros(w.ncols(), w.ncols());
        let split = r.ncols();
        block.view_mut((0, 0), (split, split)).copy_from(ai);
        block.view_mut((split, 0), (k.ncols(), split)).copy_from(ci);
        block
            .view_mut((split, split), (k.ncols(), k.ncols()))
            .copy_from(&(k.adjoint() * ei * k));
        conditions.push(ConditionEntry::from_operator(
            name,
            &(ti - &w * block * w.adjoint()),
            tolerance,
        ));
    }

    let p2_forms_agree = conditions.holds(P2) == conditions.holds(P2_RESTRICTED);
    Ok(PartialIsometryAnalysis {
        restriction: RestrictionPair {
            invariance_residuals: [op_norm(&b1), op_norm(&b2)],
            d1,
            d2,
        },
        decomposition,
        conditions,
        p2_forms_agree,
    })
}
