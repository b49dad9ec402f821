use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::operator_core::ComplexMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Verdict {
    Holds,
    Fails,
    NotEvaluated(String),
}

impl Verdict {
    pub fn from_residual(residual: f64, tolerance: f64) -> Self {
        if residual <= tolerance {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    }

    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionEntry {
    pub name: String,
    pub verdict: Verdict,
    pub residual: Option<f64>,
    pub tolerance: f64,
    /// Unit vector on which the residual operator attains its norm.
    pub witness: Option<Vec<Complex64>>,
}

impl ConditionEntry {
    /// Entry for the residual operator `m`, judged by its operator norm.
    pub fn from_operator(name: &str, m: &ComplexMatrix, tolerance: f64) -> Self {
        let (residual, witness) = norm_with_witness(m);
        let verdict = Verdict::from_residual(residual, tolerance);
        Self {
            name: name.into(),
            witness: if verdict.holds() { None } else { witness },
            verdict,
            residual: Some(residual),
            tolerance,
        }
    }

    pub fn from_value(name: &str, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            verdict: Verdict::from_residual(residual, tolerance),
            residual: Some(residual),
            tolerance,
            witness: None,
        }
    }

    pub fn not_evaluated(name: &str, reason: &str) -> Self {
        Self {
            name: name.into(),
            verdict: Verdict::NotEvaluated(reason.into()),
            residual: None,
            tolerance: 0.0,
            witness: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub entries: Vec<ConditionEntry>,
}

impl ConditionReport {
    pub fn push(&mut self, entry: ConditionEntry) {
        self.entries.push(entry);
    }

    pub fn get(&self, name: &str) -> Option<&ConditionEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn residual(&self, name: &str) -> Option<f64> {
        self.get(name).and_then(|e| e.residual)
    }

    pub fn holds(&self, name: &str) -> bool {
        self.get(name).is_some_and(|e| e.verdict.holds())
    }

    /// True when every evaluated entry holds.
    pub fn all_hold(&self) -> bool {
        self.entries
            .iter()
            .all(|e| !matches!(e.verdict, Verdict::Fails))
    }

    pub fn max_residual(&self) -> f64 {
        self.entries
            .iter()
            .filter_map(|e| e.residual)
            .fold(0.0, f64::max)
    }
}

/// Operator norm and a top right singular vector.
pub fn norm_with_witness(m: &ComplexMatrix) -> (f64, Option<Vec<Complex64>>) {
    if m.nrows() == 0 || m.ncols() == 0 {
        return (0.0, None);
    }
    let svd = m.clone().svd(false, true);
    let sv = &svd.singular_values;
    let top = sv.imax();
    let v_t = svd.v_t.expect("right singular vectors requested");
    let witness = v_t.row(top).iter().map(|z| z.conj()).collect();
    (sv[top], Some(witness))
}
