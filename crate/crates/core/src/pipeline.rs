//! End-to-end runs: derive the catalog, build the flow, eliminate, conclude;
//! replay recorded traces; run the numeric suite.
//!
//! Everything here is deterministic: the same case and the same numeric
//! configuration produce the same certificates and the same summaries.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{poly, Poly};
use crate::certificate::{compare_runs, recheck_step, Certificate, Recheck, StepMismatch, TraceBundle, Verdict};
use crate::closure::{derive_case1, derive_case2, ClosureError};
use crate::elimination::{
    case1_contradiction, case1_obstruction, case2_collapse, case2_residual, check_closure, reduced_biharmonic,
    ElimError, FlowSystem,
};
use crate::frame::CaseTag;
use crate::ode::{
    draw_case1_on_manifold, fd_crosscheck, invariant_drift, residual_falsify, sample_rng, FalsifyConfig,
    FalsifyReport, IntegrateConfig, InvariantReport, Lab, OdeError,
};

/// The conclusion printed when a case closes.
pub const MINIMAL_ONLY: &str = "biharmonic ⇔ minimal";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("derivation failed: {0}")]
    Derivation(#[from] ClosureError),
    #[error("elimination failed: {0}")]
    Elimination(#[from] ElimError),
    #[error("numeric lab failed: {0}")]
    Numeric(#[from] OdeError),
}

/// A step whose expected (published) form differs from the derived one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffEntry {
    pub certificate: String,
    pub step: String,
    pub expected: String,
    pub obtained: String,
    pub note: Option<String>,
}

/// The degree-9 comparison and the eliminant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionSummary {
    pub eliminant: String,
    pub k4_power: u32,
    pub core: String,
    pub stripped_factors: Vec<String>,
    pub core_root_intervals: Vec<(String, String)>,
    pub published: String,
    pub published_divides: bool,
    pub orders_agree: bool,
    pub reduced_biharmonic: String,
}

/// Per-case summary.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseReport {
    pub case: String,
    pub verdict: String,
    pub certificates_verified: bool,
    pub failed_steps: Vec<String>,
    pub catalog: Vec<String>,
    pub flow: Vec<String>,
    pub residual: Option<String>,
    pub obstruction: Option<ObstructionSummary>,
    pub diffs: Vec<DiffEntry>,
}

impl CaseReport {
    pub fn minimal_only(&self) -> bool {
        self.certificates_verified && self.verdict == MINIMAL_ONLY
    }
}

/// A full run of one case: the report, its certificates and what the
/// numeric lab needs.
#[derive(Clone, Debug)]
pub struct CaseRun {
    pub report: CaseReport,
    pub certificates: Vec<Certificate>,
    pub flow: FlowSystem,
    /// Case I: first-order biharmonic form; Case II: residual along the flow.
    pub residual: Poly,
}

impl CaseRun {
    pub fn lab(&self) -> Result<Lab, OdeError> {
        match self.flow.case {
            CaseTag::CaseI => Lab::case1(&self.flow, &self.residual),
            CaseTag::CaseII => Lab::case2(&self.flow, &self.residual),
        }
    }
}

fn diffs_of(certs: &[Certificate]) -> Vec<DiffEntry> {
    certs
        .iter()
        .flat_map(|c| {
            c.diffs().into_iter().map(move |s| DiffEntry {
                certificate: c.name.clone(),
                step: s.id.clone(),
                expected: s.expected.clone().unwrap_or_default(),
                obtained: s.obtained.clone(),
                note: s.note.clone(),
            })
        })
        .collect()
}

fn failed_of(certs: &[Certificate]) -> Vec<String> {
    certs.iter().flat_map(|c| c.failures().into_iter().map(move |s| format!("{}/{}", c.name, s.id))).collect()
}

fn conclude(case: CaseTag, certs: Vec<Certificate>, mut report: CaseReport, flow: FlowSystem, residual: Poly) -> CaseRun {
    report.failed_steps = failed_of(&certs);
    report.certificates_verified = report.failed_steps.is_empty();
    report.diffs = diffs_of(&certs);
    let closed = certs.last().map(|c| c.conclusion == MINIMAL_ONLY && c.passed()).unwrap_or(false);
    report.verdict = if closed && report.certificates_verified { MINIMAL_ONLY.into() } else { "undetermined".into() };
    report.case = case.slug().into();
    CaseRun { report, certificates: certs, flow, residual }
}

fn empty_report() -> CaseReport {
    CaseReport {
        case: String::new(),
        verdict: String::new(),
        certificates_verified: false,
        failed_steps: Vec::new(),
        catalog: Vec::new(),
        flow: Vec::new(),
        residual: None,
        obstruction: None,
        diffs: Vec::new(),
    }
}

/// Case I: catalog, branch arguments, flow closure, obstruction,
/// contradiction.
pub fn run_case1() -> Result<CaseRun, PipelineError> {
    let d = derive_case1()?;
    let sys = FlowSystem::case1(&d.catalog)?;
    let (_, closure) = check_closure(&sys)?;
    let (obs, ocert) = case1_obstruction(&sys)?;
    let ccert = case1_contradiction(&obs)?;
    let mut report = empty_report();
    report.catalog = d.catalog.summary();
    report.flow = sys.summary();
    report.obstruction = Some(ObstructionSummary {
        eliminant: obs.eliminant.to_string(),
        k4_power: obs.k4_power,
        core: obs.core.to_string(),
        stripped_factors: obs.factors.iter().filter(|f| f.exponent > 0).map(|f| format!("({})^{}  [{}]", f.factor, f.exponent, f.reading)).collect(),
        core_root_intervals: obs.core_roots.intervals().into_iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        published: obs.published.to_string(),
        published_divides: obs.published_divides,
        orders_agree: obs.orders_agree,
        reduced_biharmonic: obs.reduced_biharmonic.to_string(),
    });
    let mut certs = vec![d.certificate];
    certs.extend(d.branches);
    certs.extend([closure, ocert, ccert]);
    let residual = reduced_biharmonic(&sys)?;
    Ok(conclude(CaseTag::CaseI, certs, report, sys, residual))
}

/// Case II: catalog, flow closure, collapse to `6κ³`.
pub fn run_case2() -> Result<CaseRun, PipelineError> {
    let (cat, cert) = derive_case2()?;
    let sys = FlowSystem::case2(&cat)?;
    let (_, closure) = check_closure(&sys)?;
    let collapse = case2_collapse(&sys)?;
    let residual = case2_residual(&sys)?;
    let mut report = empty_report();
    report.catalog = cat.summary();
    report.flow = sys.summary();
    report.residual = Some(residual.to_string());
    Ok(conclude(CaseTag::CaseII, vec![cert, closure, collapse], report, sys, residual))
}

pub fn run_case(case: CaseTag) -> Result<CaseRun, PipelineError> {
    match case {
        CaseTag::CaseI => run_case1(),
        CaseTag::CaseII => run_case2(),
    }
}

/// Outcome of replaying a recorded trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReplayOutcome {
    pub cases: Vec<String>,
    pub steps: usize,
    /// Self-contained steps re-executed from their recorded inputs.
    pub rechecked: usize,
    pub mismatches: Vec<StepMismatch>,
    pub verdicts: BTreeMap<String, String>,
}

impl ReplayOutcome {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Re-run every case present in the bundle, compare step by step, and
/// re-execute self-contained steps from their recorded inputs.
pub fn replay(bundle: &TraceBundle) -> Result<ReplayOutcome, PipelineError> {
    let mut cases: Vec<CaseTag> = bundle.certificates.iter().filter_map(|c| c.case).collect();
    cases.sort();
    cases.dedup();
    let mut fresh = Vec::new();
    let mut verdicts = BTreeMap::new();
    for &case in &cases {
        let run = run_case(case)?;
        verdicts.insert(case.slug().to_string(), run.report.verdict.clone());
        fresh.extend(run.certificates);
    }
    let mut mismatches = compare_runs(&bundle.certificates, &fresh);
    let mut rechecked = 0;
    let mut steps = 0;
    for c in &bundle.certificates {
        for s in &c.steps {
            steps += 1;
            match recheck_step(s) {
                Recheck::NotApplicable => {}
                Recheck::Agrees => rechecked += 1,
                Recheck::Disagrees { recomputed } => {
                    rechecked += 1;
                    mismatches.push(StepMismatch {
                        certificate: c.name.clone(),
                        step: s.id.clone(),
                        field: "recheck".into(),
                        recorded: s.obtained.clone(),
                        fresh: recomputed,
                    });
                }
                Recheck::BadInput(e) => mismatches.push(StepMismatch {
                    certificate: c.name.clone(),
                    step: s.id.clone(),
                    field: "recheck-input".into(),
                    recorded: format!("{:?}", s.inputs),
                    fresh: e,
                }),
            }
        }
    }
    Ok(ReplayOutcome { cases: cases.iter().map(|c| c.slug().to_string()).collect(), steps, rechecked, mismatches, verdicts })
}

/// Recorded verdicts of a trace, one per certificate (the recorded
/// conclusion when every step passed).
pub fn recorded_verdicts(bundle: &TraceBundle) -> BTreeMap<String, String> {
    bundle
        .certificates
        .iter()
        .map(|c| {
            let failed = c.steps.iter().any(|s| s.verdict == Verdict::Failed);
            (c.name.clone(), if failed { "failed".to_string() } else { c.conclusion.clone() })
        })
        .collect()
}

/// Settings of the numeric suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericConfig {
    pub samples: usize,
    pub seed: u64,
    pub step: f64,
    pub t_max: f64,
    /// Residual tolerance of the falsification run.
    pub tolerance: f64,
    pub box_half_width: f64,
    /// Number of states in the finite-difference convergence check.
    pub fd_points: usize,
    /// Coarse finite-difference window; the check halves it once.
    pub fd_h: f64,
}

impl Default for NumericConfig {
    fn default() -> Self {
        NumericConfig {
            samples: 100,
            seed: 20240601,
            step: 1e-3,
            t_max: 1.0,
            tolerance: 1e-6,
            box_half_width: 1.0,
            fd_points: 20,
            fd_h: 0.02,
        }
    }
}

/// Finite-difference convergence of `e4(k4)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdSummary {
    pub points: usize,
    pub h: f64,
    pub ratios: Vec<f64>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Worst gap between the exact derivative and the closed trace-flow
    /// formula `3 e4(k4) = 2(k1−k4) xi − (k3−k4) eta`.
    pub max_formula_gap: f64,
}

impl FdSummary {
    pub fn passed(&self) -> bool {
        self.points > 0 && self.min_ratio >= 3.5 && self.max_ratio <= 4.5 && self.max_formula_gap < 1e-12
    }
}

/// Case II closed-form comparison `tau(t) = tau0 / (1 + tau0 t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormSummary {
    pub tau0: f64,
    pub t_max: f64,
    pub max_error: f64,
    pub max_residual: f64,
}

/// Numeric summary of one case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericSummary {
    pub case: String,
    pub invariants: Option<InvariantReport>,
    pub falsification: Option<FalsifyReport>,
    pub finite_differences: Option<FdSummary>,
    pub closed_form: Option<ClosedFormSummary>,
    pub passed: bool,
}

/// `e4(k4)` from the trace relation along the flow, written out.
fn trace_flow_formula(x: &[f64]) -> f64 {
    let (k1, k3, k4, xi, eta) = (x[0], x[1], x[2], x[3], x[4]);
    (2.0 * (k1 - k4) * xi - (k3 - k4) * eta) / 3.0
}

/// Finite-difference convergence on `points` seeded admissible states.
pub fn fd_convergence(run: &CaseRun, lab: &Lab, cfg: &NumericConfig) -> Result<FdSummary, PipelineError> {
    let k4 = poly("k4");
    let mut ratios = Vec::new();
    let mut gap: f64 = 0.0;
    for i in 0..cfg.fd_points {
        let mut rng = sample_rng(cfg.seed ^ 0x5eed_fd, i as u64);
        let x0 = draw_case1_on_manifold(lab, &mut rng, cfg.box_half_width)
            .ok_or(OdeError::NoAdmissibleSample { draws: crate::ode::MAX_ATTEMPTS })?;
        let coarse = fd_crosscheck(lab, &k4, &run.flow, &x0, cfg.fd_h)?;
        let fine = fd_crosscheck(lab, &k4, &run.flow, &x0, cfg.fd_h / 2.0)?;
        ratios.push(coarse.discrepancy / fine.discrepancy);
        gap = gap.max((coarse.symbolic - trace_flow_formula(&x0)).abs());
    }
    Ok(FdSummary {
        points: ratios.len(),
        h: cfg.fd_h,
        min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        max_ratio: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ratios,
        max_formula_gap: gap,
    })
}

/// The numeric suite of one case.
pub fn run_numeric(run: &CaseRun, cfg: &NumericConfig) -> Result<NumericSummary, PipelineError> {
    let lab = run.lab()?;
    let icfg = IntegrateConfig { t_max: cfg.t_max, step: cfg.step, ..IntegrateConfig::default() };
    match run.flow.case {
        CaseTag::CaseI => {
            let inv = invariant_drift(&lab, cfg.samples, cfg.seed, cfg.box_half_width, &icfg)?;
            let fcfg = FalsifyConfig {
                samples: cfg.samples,
                seed: cfg.seed,
                box_half_width: cfg.box_half_width,
                step: cfg.step,
                t_max: cfg.t_max,
                tolerance: cfg.tolerance,
                ..FalsifyConfig::default()
            };
            let fals = residual_falsify(&lab, &fcfg)?;
            let fd = fd_convergence(run, &lab, cfg)?;
            let passed = inv.max_i2_drift < 1e-10
                && inv.max_i1_in_box < 1e-9
                && fals.passed()
                && fals.minimal_family.max_relative_residual < 1e-9
                && fd.passed();
            Ok(NumericSummary {
                case: "case1".into(),
                invariants: Some(inv),
                falsification: Some(fals),
                finite_differences: Some(fd),
                closed_form: None,
                passed,
            })
        }
        CaseTag::CaseII => {
            let t_max = cfg.t_max.min(0.9);
            let traj = lab.integrate(&[0.0, 1.0], &IntegrateConfig { t_max, margin_floor: None, ..icfg })?;
            let max_error = traj.samples.iter().map(|s| (s.state[1] - 1.0 / (1.0 + s.t)).abs()).fold(0.0, f64::max);
            let max_residual = traj.max_abs("R2").unwrap_or(f64::INFINITY);
            Ok(NumericSummary {
                case: "case2".into(),
                invariants: None,
                falsification: None,
                finite_differences: None,
                closed_form: Some(ClosedFormSummary { tau0: 1.0, t_max, max_error, max_residual }),
                passed: max_error < 1e-8 && max_residual == 0.0,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case2_runs_and_replays() {
        let run = run_case2().unwrap();
        assert!(run.report.minimal_only(), "{:?}", run.report);
        assert_eq!(run.report.residual.as_deref(), Some("6*kappa^3"));
        let bundle = TraceBundle::new(run.certificates.clone());
        let out = replay(&TraceBundle::from_json(&bundle.to_json()).unwrap()).unwrap();
        assert!(out.ok(), "{:?}", out.mismatches);
        assert_eq!(out.verdicts["case2"], MINIMAL_ONLY);
    }

    #[test]
    fn case2_numeric_suite_passes() {
        let run = run_case2().unwrap();
        let s = run_numeric(&run, &NumericConfig::default()).unwrap();
        assert!(s.passed, "{s:?}");
    }

    #[test]
    fn tampered_obtained_is_caught() {
        let run = run_case2().unwrap();
        let mut bundle = TraceBundle::new(run.certificates);
        let step = &mut bundle.certificates[2].steps[1];
        step.obtained = step.obtained.replace('6', "7");
        let out = replay(&bundle).unwrap();
        assert!(!out.ok());
        assert!(out.mismatches.iter().any(|m| m.step == "residual" && m.field == "obtained"));
    }
}
