//! The fixed analysis pipeline and its report.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use tetrablock::analysis::{
    check_fundamental_relations, fundamental_operators, make_triple, necessary_conditions, numerical_radius_condition,
    spectral_set_falsifier, structured_relations, structured_sufficient_conditions, sufficient_conditions,
    Certificate, CommutingTriple, ConditionEntry, ConditionReport, FalsifierConfig, FundamentalPair, IsometryReport,
    RadiusScan, Verdict, P1, P2,
};
use tetrablock::geometry::{in_distinguished_boundary, in_tetrablock, TetraPoint};
use tetrablock::lifting::{
    lift_block_identities, tetra_product_lift, verify_lift, LiftDiagnostics, ProductLift, BLOCK_IDENTITY_DEGREE,
};
use tetrablock::operator_core::{
    approximate_joint_eigenvalues, classify, commutator, op_norm, serde_matrix, ComplexMatrix, OperatorClass,
    ToleranceConfig,
};
use tetrablock::structure::{analyze_partial_isometry_with_pair, PartialIsometryAnalysis, P2_RESTRICTED};
use tetrablock::Error;

use crate::input::{LoadedInput, Provenance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DossierConfig {
    pub tol: ToleranceConfig,
    /// Degree at which a constructed lift is verified.
    pub degree: usize,
    /// Lift levels; `None` uses the fewest levels protecting `degree`.
    pub levels: Option<usize>,
    pub falsifier: FalsifierConfig,
    /// Degree budget for identities checked on exact models.
    pub structured_budget: usize,
}

impl Default for DossierConfig {
    fn default() -> Self {
        Self {
            tol: ToleranceConfig::default(),
            degree: 4,
            levels: None,
            falsifier: FalsifierConfig::default(),
            structured_budget: 8,
        }
    }
}

impl DossierConfig {
    pub fn validate(&self) -> tetrablock::Result<()> {
        self.tol.validate()?;
        if !(self.falsifier.margin >= 0.0 && self.falsifier.margin.is_finite()) {
            return Err(Error::InvalidConfig("falsifier margin must be finite and nonnegative".into()));
        }
        if let Some(levels) = self.levels {
            if levels < self.degree + 2 {
                return Err(Error::InvalidConfig(format!(
                    "{levels} levels protect degree {}, below the requested {}",
                    levels.saturating_sub(2),
                    self.degree
                )));
            }
        }
        Ok(())
    }

    pub fn lift_levels(&self) -> usize {
        self.levels.unwrap_or(self.degree + 2).max(BLOCK_IDENTITY_DEGREE + 2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum StageResult<T> {
    Completed { result: T },
    Failed { error: String, internal: bool },
    Skipped { reason: String },
}

impl<T> StageResult<T> {
    fn from_result(r: tetrablock::Result<T>) -> Self {
        match r {
            Ok(result) => StageResult::Completed { result },
            Err(e) => StageResult::Failed {
                internal: e.is_internal(),
                error: e.to_string(),
            },
        }
    }

    fn skipped(reason: impl Into<String>) -> Self {
        StageResult::Skipped { reason: reason.into() }
    }

    pub fn completed(&self) -> Option<&T> {
        match self {
            StageResult::Completed { result } => Some(result),
            _ => None,
        }
    }

    pub fn is_internal_failure(&self) -> bool {
        matches!(self, StageResult::Failed { internal: true, .. })
    }

    fn status(&self) -> String {
        match self {
            StageResult::Completed { .. } => "completed".into(),
            StageResult::Failed { error, .. } => format!("failed: {error}"),
            StageResult::Skipped { reason } => format!("skipped: {reason}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutationStage {
    /// `‖[T1,T2]‖`, `‖[T1,T]‖`, `‖[T2,T]‖`.
    pub residuals: [f64; 3],
    pub tolerance: f64,
    pub commuting: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationStage {
    pub t: OperatorClass,
    pub t1: OperatorClass,
    pub t2: OperatorClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSpectrumStage {
    pub points: Vec<[Complex64; 3]>,
    /// Largest minimal witness norm; at most one means inside the closed tetrablock.
    pub max_witness_norm: f64,
    pub in_closed_tetrablock: bool,
    pub in_distinguished_boundary: bool,
    pub triangular_residual: f64,
    /// Nonzero when eigenvalue clusters of a Jordan-heavy family were averaged.
    pub cluster_radius: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundamentalStage {
    pub defect_dim: usize,
    #[serde(with = "serde_matrix")]
    pub f1: ComplexMatrix,
    #[serde(with = "serde_matrix")]
    pub f2: ComplexMatrix,
    pub residual_eq21: f64,
    pub residual_fundrel: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusStage {
    pub condition: ConditionEntry,
    pub scan: RadiusScan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuredStage {
    pub model: String,
    pub degree_budget: usize,
    pub relations: ConditionReport,
    pub sufficient: ConditionReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FalsifierStage {
    pub config: FalsifierConfig,
    pub certificate: Option<Certificate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftStage {
    pub levels: usize,
    pub protected_degree: usize,
    pub degree: usize,
    pub verify_residual: f64,
    pub tolerance: f64,
    pub verified: bool,
    pub diagnostics: LiftDiagnostics,
    pub isometry: IsometryReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Narrative {
    pub summary: String,
    pub findings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DossierReport {
    pub provenance: Provenance,
    pub config: DossierConfig,
    pub commutation: StageResult<CommutationStage>,
    pub classification: StageResult<ClassificationStage>,
    pub joint_spectrum: StageResult<JointSpectrumStage>,
    pub fundamental: StageResult<FundamentalStage>,
    pub relations: StageResult<ConditionReport>,
    pub numerical_radius: StageResult<RadiusStage>,
    pub necessary: StageResult<ConditionReport>,
    pub sufficient: StageResult<ConditionReport>,
    pub exact_model: StageResult<StructuredStage>,
    pub partial_isometry: StageResult<PartialIsometryAnalysis>,
    pub falsifier: StageResult<FalsifierStage>,
    pub lift: StageResult<LiftStage>,
    pub block_identities: StageResult<ConditionReport>,
    pub verdict: Narrative,
}

impl DossierReport {
    /// A stage hit an internal check failure (exit code 3).
    pub fn has_internal_failure(&self) -> bool {
        self.commutation.is_internal_failure()
            || self.classification.is_internal_failure()
            || self.joint_spectrum.is_internal_failure()
            || self.fundamental.is_internal_failure()
            || self.relations.is_internal_failure()
            || self.numerical_radius.is_internal_failure()
            || self.necessary.is_internal_failure()
            || self.sufficient.is_internal_failure()
            || self.exact_model.is_internal_failure()
            || self.partial_isometry.is_internal_failure()
            || self.falsifier.is_internal_failure()
            || self.lift.is_internal_failure()
            || self.block_identities.is_internal_failure()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain only finite numbers")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

const NOT_COMMUTING: &str = "input is not a commuting triple";
const NO_PAIR: &str = "no fundamental pair";

pub fn run_dossier(input: &LoadedInput, config: &DossierConfig) -> DossierReport {
    let tol = &config.tol;
    let residual_tol = tol.residual_tol;

    let residuals = [
        op_norm(&commutator(&input.t1, &input.t2)),
        op_norm(&commutator(&input.t1, &input.t)),
        op_norm(&commutator(&input.t2, &input.t)),
    ];
    let triple = make_triple(input.t1.clone(), input.t2.clone(), input.t.clone(), tol);
    let commutation = match &triple {
        Ok(_) | Err(Error::NotCommuting { .. }) => StageResult::Completed {
            result: CommutationStage {
                residuals,
                tolerance: residual_tol,
                commuting: triple.is_ok(),
            },
        },
        Err(e) => StageResult::Failed {
            error: e.to_string(),
            internal: e.is_internal(),
        },
    };
    let classification = StageResult::Completed {
        result: ClassificationStage {
            t: classify(&input.t, tol),
            t1: classify(&input.t1, tol),
            t2: classify(&input.t2, tol),
        },
    };

    let Ok(triple) = triple else {
        return finish(DossierReport {
            provenance: input.provenance.clone(),
            config: *config,
            commutation,
            classification,
            joint_spectrum: StageResult::skipped(NOT_COMMUTING),
            fundamental: StageResult::skipped(NOT_COMMUTING),
            relations: StageResult::skipped(NOT_COMMUTING),
            numerical_radius: StageResult::skipped(NOT_COMMUTING),
            necessary: StageResult::skipped(NOT_COMMUTING),
            sufficient: StageResult::skipped(NOT_COMMUTING),
            exact_model: StageResult::skipped(NOT_COMMUTING),
            partial_isometry: StageResult::skipped(NOT_COMMUTING),
            falsifier: StageResult::skipped(NOT_COMMUTING),
            lift: StageResult::skipped(NOT_COMMUTING),
            block_identities: StageResult::skipped(NOT_COMMUTING),
            verdict: Narrative {
                summary: String::new(),
                findings: Vec::new(),
            },
        });
    };

    let joint_spectrum = StageResult::from_result(joint_spectrum_stage(&triple, tol));
    let pair = fundamental_operators(&triple, tol);
    let fundamental = match &pair {
        Ok(fp) => StageResult::Completed {
            result: fundamental_stage(fp, residual_tol),
        },
        Err(e) => StageResult::Failed {
            error: e.to_string(),
            internal: e.is_internal(),
        },
    };
    let (relations, numerical_radius, necessary, sufficient) = match &pair {
        Ok(fp) => (
            StageResult::Completed {
                result: check_fundamental_relations(&triple, fp, tol),
            },
            StageResult::from_result(
                numerical_radius_condition(fp, tol).map(|(condition, scan)| RadiusStage { condition, scan }),
            ),
            StageResult::Completed {
                result: necessary_conditions(&triple, fp, tol),
            },
            StageResult::Completed {
                result: sufficient_conditions(fp, tol),
            },
        ),
        Err(_) => (
            StageResult::skipped(NO_PAIR),
            StageResult::skipped(NO_PAIR),
            StageResult::skipped(NO_PAIR),
            StageResult::skipped(NO_PAIR),
        ),
    };
    let exact_model = match &input.named {
        Some(named) => StageResult::from_result(
            structured_relations(
                &named.structured,
                &named.expected_pair,
                config.structured_budget,
                residual_tol,
            )
            .and_then(|relations| {
                Ok(StructuredStage {
                    model: named.kind.to_string(),
                    degree_budget: config.structured_budget,
                    relations,
                    sufficient: structured_sufficient_conditions(
                        &named.expected_pair,
                        config.structured_budget,
                        residual_tol,
                    )?,
                })
            }),
        ),
        None => StageResult::skipped("no exact model attached"),
    };
    let partial_isometry = match (&pair, classify(&triple.t, tol).partial_isometry) {
        (_, false) => StageResult::skipped("T is not a partial isometry"),
        (Ok(fp), true) => StageResult::from_result(analyze_partial_isometry_with_pair(&triple, fp, tol)),
        (Err(_), true) => StageResult::skipped(NO_PAIR),
    };
    let falsifier = StageResult::from_result(spectral_set_falsifier(&triple, &config.falsifier).map(|certificate| {
        FalsifierStage {
            config: config.falsifier,
            certificate,
        }
    }));

    let product_gap = op_norm(&(&triple.t1 * &triple.t2 - &triple.t));
    let contractive = op_norm(&triple.t1) <= 1.0 + residual_tol && op_norm(&triple.t2) <= 1.0 + residual_tol;
    let mut built = None;
    let lift = if product_gap > residual_tol {
        StageResult::skipped(format!("T ≠ T1T2 (‖T - T1 T2‖ = {product_gap:.3e})"))
    } else if !contractive {
        StageResult::skipped("T1 or T2 is not a contraction")
    } else {
        StageResult::from_result(lift_stage(&triple, config).map(|(stage, product)| {
            built = Some(product);
            stage
        }))
    };
    let block_identities = match (lift.completed(), &built) {
        (Some(stage), Some(product)) if stage.verified => {
            StageResult::from_result(lift_block_identities(&triple, &product.lift, tol).map(|(report, _)| report))
        }
        (Some(_), _) => StageResult::skipped("lift did not verify"),
        _ => StageResult::skipped("no lift constructed"),
    };

    finish(DossierReport {
        provenance: input.provenance.clone(),
        config: *config,
        commutation,
        classification,
        joint_spectrum,
        fundamental,
        relations,
        numerical_radius,
        necessary,
        sufficient,
        exact_model,
        partial_isometry,
        falsifier,
        lift,
        block_identities,
        verdict: Narrative {
            summary: String::new(),
            findings: Vec::new(),
        },
    })
}

fn joint_spectrum_stage(t: &CommutingTriple, tol: &ToleranceConfig) -> tetrablock::Result<JointSpectrumStage> {
    let spectrum = approximate_joint_eigenvalues(&[t.t1.clone(), t.t2.clone(), t.t.clone()], tol)?;
    let tolerance = tol.residual_tol.max(tol.rank_tol.sqrt()).max(spectrum.residual);
    let mut max_witness_norm: f64 = 0.0;
    let mut boundary = true;
    let mut points = Vec::with_capacity(spectrum.tuples.len());
    for tuple in &spectrum.tuples {
        let p = TetraPoint::new(tuple[0], tuple[1], tuple[2]);
        max_witness_norm = max_witness_norm.max(in_tetrablock(&p, true, tol.residual_tol)?.witness_norm);
        boundary &= in_distinguished_boundary(&p, tolerance);
        points.push([p.x1, p.x2, p.x3]);
    }
    Ok(JointSpectrumStage {
        in_closed_tetrablock: max_witness_norm <= 1.0 + tolerance,
        in_distinguished_boundary: boundary,
        points,
        max_witness_norm,
        triangular_residual: spectrum.residual,
        cluster_radius: spectrum.cluster_radius,
        tolerance,
    })
}

fn fundamental_stage(fp: &FundamentalPair, tolerance: f64) -> FundamentalStage {
    FundamentalStage {
        defect_dim: fp.defect_dim(),
        f1: fp.f1.clone(),
        f2: fp.f2.clone(),
        residual_eq21: fp.residual_eq21,
        residual_fundrel: fp.residual_fundrel,
        tolerance,
    }
}

fn lift_stage(t: &CommutingTriple, config: &DossierConfig) -> tetrablock::Result<(LiftStage, ProductLift)> {
    let levels = config.lift_levels();
    let product = tetra_product_lift(&t.t1, &t.t2, levels, &config.tol)?;
    let degree = config.degree.min(product.lift.protected_degree);
    let verify_residual = verify_lift(t, &product.lift, degree)?;
    let stage = LiftStage {
        levels: product.lift.levels,
        protected_degree: product.lift.protected_degree,
        degree,
        verify_residual,
        tolerance: config.tol.residual_tol,
        verified: verify_residual <= config.tol.residual_tol && product.isometry.is_isometry(),
        diagnostics: product.lift.diagnostics.clone(),
        isometry: product.isometry.clone(),
    };
    Ok((stage, product))
}

fn report_fails(stage: &StageResult<ConditionReport>) -> Vec<&ConditionEntry> {
    stage
        .completed()
        .map(|r| r.entries.iter().filter(|e| e.verdict == Verdict::Fails).collect())
        .unwrap_or_default()
}

/// Writes the narrative.
fn finish(mut report: DossierReport) -> DossierReport {
    report.verdict = narrative(&report);
    report
}

fn narrative(report: &DossierReport) -> Narrative {
    let mut findings = Vec::new();
    let commuting = report.commutation.completed().is_some_and(|c| c.commuting);
    if !commuting {
        return Narrative {
            summary: NOT_COMMUTING.into(),
            findings,
        };
    }
    if let StageResult::Failed { error, .. } = &report.fundamental {
        findings.push(format!("fundamental operators: {error}"));
        return Narrative {
            summary: "no fundamental pair; not a tetrablock contraction".into(),
            findings,
        };
    }

    let mut refuted = Vec::new();
    if let Some(stage) = report.numerical_radius.completed() {
        if !stage.condition.verdict.holds() {
            refuted.push(format!("max w(F1 + z F2) = {:.6} exceeds one", stage.scan.max));
        }
    }
    if let Some(js) = report.joint_spectrum.completed() {
        if !js.in_closed_tetrablock {
            refuted.push(format!("joint spectrum leaves the closed tetrablock (witness norm {:.6})", js.max_witness_norm));
        }
    }
    if let Some(Some(c)) = report.falsifier.completed().map(|f| &f.certificate) {
        refuted.push(format!("falsifier certificate with ratio {:.4}", c.ratio));
    }
    let necessary_failures = report_fails(&report.necessary);
    for entry in &necessary_failures {
        findings.push(format!("necessary condition fails: {}", entry.name));
    }
    for entry in report_fails(&report.relations) {
        findings.push(format!("relation fails: {}", entry.name));
    }

    let sufficient = report.sufficient.completed();
    let p1 = sufficient.is_some_and(|r| r.holds(P1));
    let p2 = sufficient.is_some_and(|r| r.holds(P2));
    if sufficient.is_some() {
        findings.push(format!("(P1) {}", if p1 { "holds" } else { "violated" }));
        findings.push(format!("(P2) {}", if p2 { "holds" } else { "violated" }));
    }
    if let Some(pi) = report.partial_isometry.completed() {
        findings.push(format!(
            "T is a partial isometry; (P2) and its restriction form {}",
            if pi.p2_forms_agree { "agree" } else { "disagree" }
        ));
        if !pi.conditions.holds(P2_RESTRICTED) {
            findings.push("restriction pair (D1, D2) violates (P2)".into());
        }
    }
    if let Some(model) = report.exact_model.completed() {
        findings.push(format!(
            "exact model `{}`: relations {} up to degree {}",
            model.model,
            if model.relations.all_hold() { "hold" } else { "fail" },
            model.degree_budget
        ));
    }

    let tetra_unitary = report
        .classification
        .completed()
        .is_some_and(|c| c.t.unitary && c.t2.contraction)
        && report.relations.completed().is_some_and(|r| r.all_hold())
        && refuted.is_empty();
    if tetra_unitary {
        findings.push("T is unitary and T1 = T2* T: a tetrablock unitary".into());
    }

    let mut parts = Vec::new();
    match &report.lift {
        _ if tetra_unitary => parts.push("tetrablock unitary; it is its own dilation".into()),
        StageResult::Completed { result } if result.verified => {
            parts.push(format!("lift verified at degree {}", result.degree));
            if sufficient.is_some() && !p2 {
                parts.push("(P2) violated".into());
            }
            if !necessary_failures.is_empty() {
                parts.push("necessary conditions fail despite the lift".into());
            }
        }
        other => {
            if sufficient.is_some() && !p2 {
                parts.push("P2 fails".into());
            } else if p1 && p2 {
                parts.push("(P1) and (P2) hold".into());
            }
            match other {
                StageResult::Skipped { reason } if reason.starts_with("T ≠ T1T2") => {
                    parts.push("no lift constructed (T ≠ T1T2)".into())
                }
                StageResult::Skipped { reason } => parts.push(format!("no lift constructed ({reason})")),
                StageResult::Failed { error, .. } => parts.push(format!("lift construction failed ({error})")),
                StageResult::Completed { result } => parts.push(format!(
                    "constructed lift did not verify at degree {} (residual {:.3e})",
                    result.degree, result.verify_residual
                )),
            }
            if !refuted.is_empty() {
                parts.push("not a tetrablock contraction".into());
            } else if !necessary_failures.is_empty() {
                parts.push("no tetrablock-isometric lift".into());
            } else {
                parts.push("lift existence undetermined".into());
            }
        }
    }
    findings.extend(refuted);
    Narrative {
        summary: parts.join("; "),
        findings,
    }
}

fn render_conditions(out: &mut String, report: &ConditionReport) {
    for e in &report.entries {
        let mark = match &e.verdict {
            Verdict::Holds => "holds".to_string(),
            Verdict::Fails => "FAILS".to_string(),
            Verdict::NotEvaluated(why) => format!("not evaluated ({why})"),
        };
        match e.residual {
            Some(r) => {
                let _ = writeln!(out, "    {:<48} {mark:<6} residual {r:.3e} (tol {:.1e})", e.name, e.tolerance);
            }
            None => {
                let _ = writeln!(out, "    {:<48} {mark}", e.name);
            }
        }
    }
}

fn render_stage<T>(out: &mut String, title: &str, stage: &StageResult<T>, body: impl FnOnce(&mut String, &T)) {
    let _ = writeln!(out, "[{title}] {}", stage.status());
    if let StageResult::Completed { result } = stage {
        body(out, result);
    }
}

impl DossierReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let p = &self.provenance;
        let _ = writeln!(out, "dossier for {} (dimension {})", p.source, p.dim);
        if let Some(n) = p.truncation {
            let _ = writeln!(out, "  truncation {n}");
        }
        if let Some(seed) = p.seed {
            let _ = writeln!(out, "  seed {seed}");
        }
        let _ = writeln!(
            out,
            "  tolerances: rank {:.1e}, residual {:.1e}, grid {}",
            self.config.tol.rank_tol, self.config.tol.residual_tol, self.config.tol.grid_points
        );
        render_stage(&mut out, "commutation", &self.commutation, |out, c| {
            let _ = writeln!(
                out,
                "    residuals {:.3e} {:.3e} {:.3e} (tol {:.1e})",
                c.residuals[0], c.residuals[1], c.residuals[2], c.tolerance
            );
        });
        render_stage(&mut out, "classification", &self.classification, |out, c| {
            let _ = writeln!(
                out,
                "    T: norm {:.6}, isometry {}, coisometry {}, partial isometry {}",
                c.t.norm, c.t.isometry, c.t.coisometry, c.t.partial_isometry
            );
            let _ = writeln!(out, "    T1: norm {:.6}; T2: norm {:.6}", c.t1.norm, c.t2.norm);
        });
        render_stage(&mut out, "joint spectrum", &self.joint_spectrum, |out, j| {
            let _ = writeln!(
                out,
                "    {} points (cluster radius {:.0e}), max witness norm {:.6}, closed tetrablock {}, distinguished boundary {} (tol {:.1e})",
                j.points.len(),
                j.cluster_radius,
                j.max_witness_norm,
                j.in_closed_tetrablock,
                j.in_distinguished_boundary,
                j.tolerance
            );
        });
        render_stage(&mut out, "fundamental operators", &self.fundamental, |out, f| {
            let _ = writeln!(
                out,
                "    defect dimension {}, defining equations {:.3e}, relations {:.3e} (tol {:.1e})",
                f.defect_dim, f.residual_eq21, f.residual_fundrel, f.tolerance
            );
        });
        render_stage(&mut out, "relations", &self.relations, render_conditions);
        render_stage(&mut out, "numerical radius", &self.numerical_radius, |out, r| {
            let _ = writeln!(
                out,
                "    max w(F1 + z F2) = {:.9} at phase {:.4} (tol {:.1e})",
                r.scan.max, r.scan.argmax_phase, r.condition.tolerance
            );
        });
        render_stage(&mut out, "necessary conditions", &self.necessary, render_conditions);
        render_stage(&mut out, "sufficient conditions", &self.sufficient, render_conditions);
        render_stage(&mut out, "exact model", &self.exact_model, |out, m| {
            let _ = writeln!(out, "    model {}, degree budget {}", m.model, m.degree_budget);
            render_conditions(out, &m.relations);
            render_conditions(out, &m.sufficient);
        });
        render_stage(&mut out, "partial isometry", &self.partial_isometry, |out, a| {
            let _ = writeln!(
                out,
                "    dim Ker T = {}, dim Ran T* = {}",
                a.decomposition.ker_t.dim(),
                a.decomposition.ran_tstar.dim()
            );
            render_conditions(out, &a.conditions);
        });
        render_stage(&mut out, "falsifier", &self.falsifier, |out, f| {
            match &f.certificate {
                Some(c) => {
                    let _ = writeln!(
                        out,
                        "    certificate: polynomial #{} with ‖p(T)‖ = {:.6} > sup {:.6} (ratio {:.4})",
                        c.poly_index, c.operator_norm, c.sup_estimate, c.ratio
                    );
                }
                None => {
                    let _ = writeln!(
                        out,
                        "    none found ({} polynomials of degree <= {}, {} samples, margin {})",
                        f.config.n_polys, f.config.degree, f.config.n_samples, f.config.margin
                    );
                }
            }
        });
        render_stage(&mut out, "lift", &self.lift, |out, l| {
            let _ = writeln!(
                out,
                "    {} levels (protected degree {}), verify residual at degree {}: {:.3e} (tol {:.1e})",
                l.levels, l.protected_degree, l.degree, l.verify_residual, l.tolerance
            );
            let _ = writeln!(
                out,
                "    commutation {:.3e}, isometry V1 {:.3e} V2 {:.3e} V {:.3e}, lift property {:.3e}",
                l.diagnostics.commutation,
                l.diagnostics.isometry_v1,
                l.diagnostics.isometry_v2,
                l.diagnostics.isometry_v,
                l.diagnostics.lift_property
            );
            render_conditions(out, &l.isometry.details);
        });
        render_stage(&mut out, "block identities", &self.block_identities, render_conditions);
        let _ = writeln!(out, "verdict: {}", self.verdict.summary);
        for f in &self.verdict.findings {
            let _ = writeln!(out, "  - {f}");
        }
        out
    }
}
