use super::{ConditionEntry, ConditionReport, P1, P2};
use crate::error::Result;
use crate::operator_core::op_norm;
use crate::shift_calculus::{verify_identity, StructuredOperator};

/// Triple of exact operators on `H²(C^fiber)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredTriple {
    pub t1: StructuredOperator,
    pub t2: StructuredOperator,
    pub t: StructuredOperator,
}

/// Exact defect operator and fundamental operators, the latter extended by
/// zero off the defect space.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredPair {
    pub defect: StructuredOperator,
    pub f1: StructuredOperator,
    pub f2: StructuredOperator,
}

fn product(ops: &[&StructuredOperator]) -> Result<StructuredOperator> {
    let mut acc = ops[0].clone();
    for op in &ops[1..] {
        acc = acc.compose(op)?;
    }
    Ok(acc)
}

fn entry(name: &str, lhs: &StructuredOperator, rhs: &StructuredOperator, budget: usize, tol: f64) -> Result<ConditionEntry> {
    let check = verify_identity(lhs, rhs, budget, tol)?;
    Ok(ConditionEntry::from_value(name, check.max_residual, tol))
}

/// Commutation, the defining equations, the fundamental relations and the
/// cross identity, each checked on all basis vectors up to `degree_budget`.
pub fn structured_relations(
    t: &StructuredTriple,
    fp: &StructuredPair,
    degree_budget: usize,
    tol: f64,
) -> Result<ConditionReport> {
    let d = &fp.defect;
    let (f1a, f2a) = (fp.f1.adjoint(), fp.f2.adjoint());
    let (t1a, t2a) = (t.t1.adjoint(), t.t2.adjoint());
    let mut report = ConditionReport::default();

    for (name, a, b) in [("T1 T2 = T2 T1", &t.t1, &t.t2), ("T1 T = T T1", &t.t1, &t.t), ("T2 T = T T2", &t.t2, &t.t)] {
        report.push(entry(name, &product(&[a, b])?, &product(&[b, a])?, degree_budget, tol)?);
    }
    let fiber = t.t.in_fiber();
    let ident = StructuredOperator::identity(fiber);
    report.push(entry(
        "D^2 = I - T*T",
        &product(&[d, d])?,
        &ident.minus(&product(&[&t.t.adjoint(), &t.t])?)?,
        degree_budget,
        tol,
    )?);
    report.push(entry(
        "T1 - T2*T = D F1 D",
        &t.t1.minus(&product(&[&t2a, &t.t])?)?,
        &product(&[d, &fp.f1, d])?,
        degree_budget,
        tol,
    )?);
    report.push(entry(
        "T2 - T1*T = D F2 D",
        &t.t2.minus(&product(&[&t1a, &t.t])?)?,
        &product(&[d, &fp.f2, d])?,
        degree_budget,
        tol,
    )?);
    report.push(entry(
        "D T1 = F1 D + F2* D T",
        &product(&[d, &t.t1])?,
        &product(&[&fp.f1, d])?.plus(&product(&[&f2a, d, &t.t])?)?,
        degree_budget,
        tol,
    )?);
    report.push(entry(
        "D T2 = F2 D + F1* D T",
        &product(&[d, &t.t2])?,
        &product(&[&fp.f2, d])?.plus(&product(&[&f1a, d, &t.t])?)?,
        degree_budget,
        tol,
    )?);
    let lhs = product(&[&f1a, d, &t.t1])?.minus(&product(&[&f2a, d, &t.t2])?)?;
    let rhs = product(&[&f1a, &fp.f1])?
        .minus(&product(&[&f2a, &fp.f2])?)?
        .compose(d)?
        .plus(
            &product(&[&f1a, &f2a])?
                .minus(&product(&[&f2a, &f1a])?)?
                .compose(&product(&[d, &t.t])?)?,
        )?;
    report.push(entry("cross identity", &lhs, &rhs, degree_budget, tol)?);
    Ok(report)
}

/// (P1) and (P2) for exact operators; each residual is the norm of the
/// compression of the exact residual operator to degrees below `n`.
pub fn structured_sufficient_conditions(fp: &StructuredPair, n: usize, tol: f64) -> Result<ConditionReport> {
    let (f1, f2) = (&fp.f1, &fp.f2);
    let p1 = product(&[f1, f2])?.minus(&product(&[f2, f1])?)?;
    let self_comm = |f: &StructuredOperator| -> Result<StructuredOperator> {
        product(&[&f.adjoint(), f])?.minus(&product(&[f, &f.adjoint()])?)
    };
    let p2 = self_comm(f1)?.minus(&self_comm(f2)?)?;
    let mut report = ConditionReport::default();
    report.push(ConditionEntry::from_value(P1, op_norm(&p1.compress(n)), tol));
    report.push(ConditionEntry::from_value(P2, op_norm(&p2.compress(n)), tol));
    Ok(report)
}
