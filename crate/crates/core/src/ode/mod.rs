//! Floating-point companion to the exact layers.
//!
//! A [`Lab`] compiles the state vector field of a [`FlowSystem`] and a set of
//! monitors (the first integrals and the biharmonic residual) into plain
//! `f64` evaluators. On top of it:
//!
//! * [`Lab::integrate`] — fixed-step RK4 or adaptive step-doubling RK4 with
//!   dense samples at fixed times, blow-up and degeneracy flags;
//! * [`residual_falsify`] — seeded sampling of admissible Case I states on
//!   the constraint manifold, projected onto a vanishing residual, recording
//!   how fast the residual leaves zero;
//! * [`fd_crosscheck`] — compares an exact flow derivative with a central
//!   finite difference along the integrated flow.
//!
//! Sampling is deterministic: sample `i` draws from a ChaCha8 stream seeded
//! with the run seed and stream number `i`, so any split of the sample range
//! across workers reproduces the serial report.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{sym, JetSym, Poly};
use crate::elimination::{ElimError, FlowSystem};
use crate::frame::CaseTag;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("initial state violates the admissibility margin {margin} ({value:e})")]
    DegenerateEntry { margin: String, value: f64 },
    #[error("blow-up at t = {t}: last valid state {last:?}")]
    BlowUp { t: f64, last: Vec<f64> },
    #[error("no admissible sample among {draws} draws")]
    NoAdmissibleSample { draws: usize },
    #[error("polynomial mentions {0}, which is not a state symbol")]
    ForeignSymbol(String),
    #[error(transparent)]
    Elimination(#[from] ElimError),
}

/// A polynomial compiled against a fixed state ordering.
#[derive(Clone, Debug)]
struct Compiled {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl Compiled {
    fn new(p: &Poly, vars: &[JetSym]) -> Result<Self, OdeError> {
        let mut terms = Vec::with_capacity(p.num_terms());
        for (m, c) in p.terms() {
            let mut fs = Vec::new();
            for (s, e) in m.factors() {
                let idx = vars.iter().position(|v| v == s).ok_or_else(|| OdeError::ForeignSymbol(s.to_string()))?;
                fs.push((idx, *e as i32));
            }
            terms.push((c.to_f64(), fs));
        }
        Ok(Compiled { terms })
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(c, fs)| fs.iter().fold(*c, |acc, &(i, e)| acc * x[i].powi(e))).sum()
    }
}

/// Integration method.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk4,
    Adaptive,
}

/// Integration settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrateConfig {
    pub t_max: f64,
    /// Fixed step (RK4) or initial step (adaptive).
    pub step: f64,
    pub method: Method,
    /// Spacing of the dense samples; defaults to `step`.
    pub sample_dt: Option<f64>,
    /// Any state component beyond this magnitude halts with a blow-up flag.
    pub blowup: f64,
    /// Adaptive steps below this length halt with a blow-up flag.
    pub min_step: f64,
    /// Local error tolerance of the adaptive method.
    pub tolerance: f64,
    /// Admissibility floor; `None` disables the margin checks.
    pub margin_floor: Option<f64>,
}

impl Default for IntegrateConfig {
    fn default() -> Self {
        IntegrateConfig {
            t_max: 1.0,
            step: 1e-3,
            method: Method::Rk4,
            sample_dt: None,
            blowup: 1e6,
            min_step: 1e-12,
            tolerance: 1e-12,
            margin_floor: Some(1e-9),
        }
    }
}

impl IntegrateConfig {
    fn validate(&self) -> Result<(), OdeError> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(OdeError::InvalidConfig(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("t_max", self.t_max)?;
        positive("step", self.step)?;
        positive("blowup", self.blowup)?;
        positive("min_step", self.min_step)?;
        positive("tolerance", self.tolerance)?;
        if let Some(dt) = self.sample_dt {
            positive("sample_dt", dt)?;
        }
        if let Some(f) = self.margin_floor {
            if !(f.is_finite() && f >= 0.0) {
                return Err(OdeError::InvalidConfig(format!("margin floor must be non-negative, got {f}")));
            }
        }
        Ok(())
    }
}

/// Why an integration stopped before `t_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Halt {
    BlowUp { t: f64, last: Vec<f64> },
    StepCollapse { t: f64, last: Vec<f64> },
    Degenerate { t: f64, margin: String, value: f64 },
}

impl Halt {
    pub fn time(&self) -> f64 {
        match self {
            Halt::BlowUp { t, .. } | Halt::StepCollapse { t, .. } | Halt::Degenerate { t, .. } => *t,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Halt::BlowUp { .. } => "blow-up",
            Halt::StepCollapse { .. } => "step-collapse",
            Halt::Degenerate { .. } => "degenerate",
        }
    }
}

/// One dense output sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub state: Vec<f64>,
    pub monitors: Vec<f64>,
}

/// A sampled trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub case: CaseTag,
    pub state_names: Vec<String>,
    pub monitor_names: Vec<String>,
    pub samples: Vec<Sample>,
    pub halt: Option<Halt>,
}

impl Trajectory {
    /// Maximum of `|monitor(t) − monitor(0)|` over the samples.
    pub fn drift(&self, monitor: &str) -> Option<f64> {
        let i = self.monitor_names.iter().position(|m| m == monitor)?;
        let m0 = self.samples.first()?.monitors[i];
        Some(self.samples.iter().map(|s| (s.monitors[i] - m0).abs()).fold(0.0, f64::max))
    }

    /// Maximum of `|monitor(t)|` over the samples.
    pub fn max_abs(&self, monitor: &str) -> Option<f64> {
        let i = self.monitor_names.iter().position(|m| m == monitor)?;
        Some(self.samples.iter().map(|s| s.monitors[i].abs()).fold(0.0, f64::max))
    }

    /// First sample time at which `|monitor| > tol`.
    pub fn escape_time(&self, monitor: &str, tol: f64) -> Option<f64> {
        let i = self.monitor_names.iter().position(|m| m == monitor)?;
        self.samples.iter().find(|s| s.monitors[i].abs() > tol).map(|s| s.t)
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("a trajectory has at least its initial sample")
    }

    /// Error out when the run stopped early.
    pub fn ensure_complete(&self) -> Result<(), OdeError> {
        match &self.halt {
            None => Ok(()),
            Some(h) => Err(OdeError::BlowUp { t: h.time(), last: self.last().state.clone() }),
        }
    }

    /// CSV with header `t,<state>,<monitors>`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for n in self.state_names.iter().chain(&self.monitor_names) {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for s in &self.samples {
            out.push_str(&s.t.to_string());
            for v in s.state.iter().chain(&s.monitors) {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Compiled numeric model of one case.
#[derive(Clone, Debug)]
pub struct Lab {
    case: CaseTag,
    vars: Vec<JetSym>,
    field: Vec<Compiled>,
    monitor_names: Vec<String>,
    monitors: Vec<Compiled>,
    margins: Vec<(String, Compiled)>,
    /// Exact state vector field, for the symbolic side of cross-checks.
    symbolic_field: BTreeMap<JetSym, Poly>,
}

fn state_name(s: &JetSym) -> String {
    s.to_string()
}

impl Lab {
    /// Case I: state `(k1, k3, k4, xi, eta)`, monitors `I1 = xi*eta − k1*k3`,
    /// `I2 = 2k1 + k3 + 3k4` and the residual `R` of the first-order
    /// biharmonic form with `e4(k4)` solved from the trace relation along
    /// the flow. Margins: `k1 − k3`, `k1 − k4`, `k3 − k4`, `e4(k4)`.
    pub fn case1(sys: &FlowSystem, reduced_biharmonic: &Poly) -> Result<Self, OdeError> {
        let vars = sys.state.clone();
        let aux = sys.auxiliary_solution()?;
        let field = sys.vector_field()?;
        let compile = |p: &Poly| Compiled::new(p, &vars);
        let e = aux.get(&sym::d(&[4], sym::k4())).cloned().ok_or_else(|| {
            OdeError::Elimination(ElimError::FlowNotClosed("e4(k4) has no algebraic solution".into()))
        })?;
        let residual = reduced_biharmonic.substitute_unchecked(&aux);
        let monitors = vec![
            compile(&crate::algebra::poly("xi*eta - k1*k3"))?,
            compile(&crate::algebra::poly("2*k1 + k3 + 3*k4"))?,
            compile(&residual)?,
        ];
        let margins = vec![
            ("k1-k3".to_string(), compile(&crate::algebra::poly("k1 - k3"))?),
            ("k1-k4".to_string(), compile(&crate::algebra::poly("k1 - k4"))?),
            ("k3-k4".to_string(), compile(&crate::algebra::poly("k3 - k4"))?),
            ("e4(k4)".to_string(), compile(&e)?),
        ];
        Ok(Lab {
            case: CaseTag::CaseI,
            field: vars.iter().map(|s| compile(&field[s])).collect::<Result<_, _>>()?,
            vars,
            monitor_names: vec!["I1".into(), "I2".into(), "R".into()],
            monitors,
            margins,
            symbolic_field: field,
        })
    }

    /// Case II: state `(kappa, tau)`, monitor `R2` (the residual of the
    /// biharmonic equation along the flow). No margins.
    pub fn case2(sys: &FlowSystem, residual: &Poly) -> Result<Self, OdeError> {
        let vars = sys.state.clone();
        let field = sys.vector_field()?;
        Ok(Lab {
            case: CaseTag::CaseII,
            field: vars.iter().map(|s| Compiled::new(&field[s], &vars)).collect::<Result<_, _>>()?,
            monitor_names: vec!["R2".into()],
            monitors: vec![Compiled::new(residual, &vars)?],
            margins: Vec::new(),
            vars,
            symbolic_field: field,
        })
    }

    pub fn case(&self) -> CaseTag {
        self.case
    }

    pub fn dimension(&self) -> usize {
        self.vars.len()
    }

    pub fn state_names(&self) -> Vec<String> {
        self.vars.iter().map(state_name).collect()
    }

    pub fn monitor_names(&self) -> &[String] {
        &self.monitor_names
    }

    /// Right-hand side of the flow.
    pub fn rhs(&self, x: &[f64]) -> Vec<f64> {
        self.field.iter().map(|f| f.eval(x)).collect()
    }

    pub fn monitors(&self, x: &[f64]) -> Vec<f64> {
        self.monitors.iter().map(|m| m.eval(x)).collect()
    }

    /// Named admissibility margins at `x`.
    pub fn margins(&self, x: &[f64]) -> Vec<(String, f64)> {
        self.margins.iter().map(|(n, m)| (n.clone(), m.eval(x))).collect()
    }

    /// The first margin whose magnitude is not above `floor`.
    pub fn margin_violation(&self, x: &[f64], floor: f64) -> Option<(String, f64)> {
        self.margins(x).into_iter().find(|(_, v)| !(v.abs() > floor))
    }

    /// Evaluate an exact polynomial in the state at `x`.
    pub fn eval(&self, p: &Poly, x: &[f64]) -> Result<f64, OdeError> {
        Ok(Compiled::new(p, &self.vars)?.eval(x))
    }

    fn rk4_step(&self, x: &[f64], h: f64) -> Vec<f64> {
        let add = |a: &[f64], b: &[f64], s: f64| a.iter().zip(b).map(|(u, v)| u + s * v).collect::<Vec<_>>();
        let k1 = self.rhs(x);
        let k2 = self.rhs(&add(x, &k1, h / 2.0));
        let k3 = self.rhs(&add(x, &k2, h / 2.0));
        let k4 = self.rhs(&add(x, &k3, h));
        (0..x.len()).map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
    }

    /// Advance by `span` (either sign) in `n` equal RK4 steps, halting on
    /// blow-up.
    fn advance(&self, x: &[f64], span: f64, n: usize, blowup: f64) -> Result<Vec<f64>, OdeError> {
        let h = span / n as f64;
        let mut cur = x.to_vec();
        for k in 0..n {
            let next = self.rk4_step(&cur, h);
            if next.iter().any(|v| !v.is_finite() || v.abs() > blowup) {
                return Err(OdeError::BlowUp { t: k as f64 * h, last: cur });
            }
            cur = next;
        }
        Ok(cur)
    }

    /// Integrate from `x0` over `[0, t_max]` with dense samples.
    pub fn integrate(&self, x0: &[f64], cfg: &IntegrateConfig) -> Result<Trajectory, OdeError> {
        cfg.validate()?;
        if x0.len() != self.vars.len() || x0.iter().any(|v| !v.is_finite()) {
            return Err(OdeError::InvalidConfig(format!(
                "initial state must be {} finite numbers, got {x0:?}",
                self.vars.len()
            )));
        }
        if let Some(floor) = cfg.margin_floor {
            if let Some((margin, value)) = self.margin_violation(x0, floor) {
                return Err(OdeError::DegenerateEntry { margin, value });
            }
        }
        let dt = cfg.sample_dt.unwrap_or(cfg.step);
        let n_samples = (cfg.t_max / dt - 1e-9).ceil().max(1.0) as usize;
        let mut samples = vec![Sample { t: 0.0, state: x0.to_vec(), monitors: self.monitors(x0) }];
        let mut x = x0.to_vec();
        let mut t = 0.0;
        let mut h_adapt = cfg.step;
        let mut halt = None;
        'outer: for k in 1..=n_samples {
            let t_next = (k as f64 * dt).min(cfg.t_max);
            match cfg.method {
                Method::Rk4 => {
                    let n = ((t_next - t) / cfg.step).round().max(1.0) as usize;
                    let h = (t_next - t) / n as f64;
                    for j in 0..n {
                        let next = self.rk4_step(&x, h);
                        if next.iter().any(|v| !v.is_finite() || v.abs() > cfg.blowup) {
                            halt = Some(Halt::BlowUp { t: t + j as f64 * h, last: x.clone() });
                            break 'outer;
                        }
                        x = next;
                    }
                }
                Method::Adaptive => {
                    let mut tc = t;
                    while tc < t_next {
                        let h = h_adapt.min(t_next - tc);
                        if h < cfg.min_step && t_next - tc > cfg.min_step {
                            halt = Some(Halt::StepCollapse { t: tc, last: x.clone() });
                            break 'outer;
                        }
                        let full = self.rk4_step(&x, h);
                        let half = self.rk4_step(&self.rk4_step(&x, h / 2.0), h / 2.0);
                        let scale = 1.0 + half.iter().map(|v| v.abs()).fold(0.0, f64::max);
                        let err = full.iter().zip(&half).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / 15.0;
                        if !err.is_finite() || half.iter().any(|v| !v.is_finite() || v.abs() > cfg.blowup) {
                            if h <= cfg.min_step {
                                halt = Some(Halt::BlowUp { t: tc, last: x.clone() });
                                break 'outer;
                            }
                            h_adapt = h / 4.0;
                            continue;
                        }
                        let factor = if err == 0.0 { 4.0 } else { (0.9 * (cfg.tolerance * scale / err).powf(0.2)).clamp(0.1, 4.0) };
                        if err <= cfg.tolerance * scale {
                            // Richardson extrapolation of the two estimates.
                            x = half.iter().zip(&full).map(|(b, a)| b + (b - a) / 15.0).collect();
                            tc += h;
                            if h == h_adapt || factor < 1.0 {
                                h_adapt = h * factor;
                            }
                        } else {
                            h_adapt = h * factor;
                        }
                    }
                }
            }
            t = t_next;
            samples.push(Sample { t, state: x.clone(), monitors: self.monitors(&x) });
            if let Some(floor) = cfg.margin_floor {
                if let Some((margin, value)) = self.margin_violation(&x, floor) {
                    halt = Some(Halt::Degenerate { t, margin, value });
                    break;
                }
            }
        }
        Ok(Trajectory {
            case: self.case,
            state_names: self.state_names(),
            monitor_names: self.monitor_names.clone(),
            samples,
            halt,
        })
    }
}

/// Outcome of one finite-difference cross-check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    /// Exact flow derivative evaluated at the point.
    pub symbolic: f64,
    /// Central difference `(f(x(h)) − f(x(−h))) / 2h`.
    pub numeric: f64,
    pub discrepancy: f64,
}

/// RK4 substeps used to integrate each half-window of a cross-check.
const FD_SUBSTEPS: usize = 64;

/// Compare `e4(expr)` (the exact Leibniz derivative along the state vector
/// field) with a central difference along the integrated flow.
pub fn fd_crosscheck(lab: &Lab, expr: &Poly, sys: &FlowSystem, x0: &[f64], h: f64) -> Result<Discrepancy, OdeError> {
    if !(h.is_finite() && h > 0.0) {
        return Err(OdeError::InvalidConfig(format!("h must be positive, got {h}")));
    }
    if let Some(s) = expr.symbols().into_iter().find(|s| !sys.state.contains(s)) {
        return Err(OdeError::ForeignSymbol(s.to_string()));
    }
    let d = sys.field_derivative(expr)?;
    let symbolic = lab.eval(&d, x0)?;
    let f = Compiled::new(expr, &lab.vars)?;
    let fwd = lab.advance(x0, h, FD_SUBSTEPS, 1e6)?;
    let bwd = lab.advance(x0, -h, FD_SUBSTEPS, 1e6)?;
    let numeric = (f.eval(&fwd) - f.eval(&bwd)) / (2.0 * h);
    Ok(Discrepancy { symbolic, numeric, discrepancy: (symbolic - numeric).abs() })
}

/// The symbolic vector field the lab was compiled from.
pub fn symbolic_field(lab: &Lab) -> &BTreeMap<JetSym, Poly> {
    &lab.symbolic_field
}

/// A deterministic per-sample random stream.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Margin demanded of sampled initial states (well above the integration
/// floor, so that an entry is not borderline).
pub const SAMPLE_MARGIN: f64 = 1e-3;

/// Draws per sample before the sampler gives up on it.
pub const MAX_ATTEMPTS: usize = 1000;

/// A Case I state on `I1 = I2 = 0` with every component in `[−b, b]` and
/// margins above [`SAMPLE_MARGIN`]: `k1, k4, xi` uniform, then `k3` from the
/// trace relation and `eta` from the product relation.
pub fn draw_case1_on_manifold(lab: &Lab, rng: &mut ChaCha8Rng, b: f64) -> Option<Vec<f64>> {
    for _ in 0..MAX_ATTEMPTS {
        let k1 = rng.gen_range(-b..=b);
        let k4 = rng.gen_range(-b..=b);
        let xi = rng.gen_range(-b..=b);
        let k3 = -2.0 * k1 - 3.0 * k4;
        if xi.abs() < SAMPLE_MARGIN {
            continue;
        }
        let x = vec![k1, k3, k4, xi, k1 * k3 / xi];
        if x.iter().all(|v| v.abs() <= b) && lab.margin_violation(&x, SAMPLE_MARGIN).is_none() {
            return Some(x);
        }
    }
    None
}

/// Project `(k1, k4)` onto `I1 = I2 = R = 0`. With `k3 = −2k1 − 3k4`,
/// `eta = k1 k3 / xi` and `e4(k4)` from the trace relation along the flow,
/// `3 xi² R = 0` is a quadratic in `u = xi²`:
/// `−2(k1−k4) u² + (2(k1−k4) d − c − 3P) u + c d = 0` with `m = k1 k3`,
/// `c = (2k1+4k4) m`, `d = 2m`, `P = k4 (24k1² + 42k1k4 + 21k4²)`.
/// Returns the states for every positive root and both signs of `xi`.
pub fn project_on_residual(k1: f64, k4: f64) -> Vec<Vec<f64>> {
    let k3 = -2.0 * k1 - 3.0 * k4;
    let m = k1 * k3;
    let c = (2.0 * k1 + 4.0 * k4) * m;
    let d = 2.0 * m;
    let p = k4 * (24.0 * k1 * k1 + 42.0 * k1 * k4 + 21.0 * k4 * k4);
    let qa = -2.0 * (k1 - k4);
    let qb = 2.0 * (k1 - k4) * d - c - 3.0 * p;
    let qc = c * d;
    let mut roots = Vec::new();
    if qa.abs() < 1e-14 {
        if qb.abs() > 1e-14 {
            roots.push(-qc / qb);
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            // Numerically stable pair.
            let q = -0.5 * (qb + qb.signum() * disc.sqrt());
            if q != 0.0 {
                roots.push(q / qa);
                roots.push(qc / q);
            }
        }
    }
    let mut out = Vec::new();
    for u in roots {
        if u.is_finite() && u > 0.0 {
            for xi in [u.sqrt(), -u.sqrt()] {
                out.push(vec![k1, k3, k4, xi, m / xi]);
            }
        }
    }
    out
}

/// Settings of a falsification run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FalsifyConfig {
    pub samples: usize,
    pub seed: u64,
    /// Half-width of the sampling box for `k1`, `k4`.
    pub box_half_width: f64,
    pub step: f64,
    pub t_max: f64,
    /// `|R|` above this counts as having left zero.
    pub tolerance: f64,
    pub margin_floor: f64,
}

impl Default for FalsifyConfig {
    fn default() -> Self {
        FalsifyConfig {
            samples: 100,
            seed: 20240601,
            box_half_width: 1.0,
            step: 1e-3,
            t_max: 1.0,
            tolerance: 1e-6,
            margin_floor: 1e-9,
        }
    }
}

/// One projected sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleOutcome {
    pub index: usize,
    pub initial: Vec<f64>,
    pub initial_residual: f64,
    /// First sample time with `|R| > tolerance`.
    pub escape_time: Option<f64>,
    pub halt: Option<Halt>,
    pub max_residual: f64,
    /// Non-degenerate, never escaped, reached `t_max`.
    pub persistent: bool,
}

/// Probe of the `a = −1` locus (`k1 = −k4`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocusProbe {
    pub tested: usize,
    pub margin_violations: usize,
    pub violated_margin: Option<String>,
}

/// The excluded minimal family `k4 = 0`, `xi = √2 k1`, `eta = −√2 k1`,
/// `k3 = −2k1`, integrated with margin checks off.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
///
/// The residual is homogeneous of degree three in the state, so rounding
/// near a blow-up inflates its absolute value; `max_relative_residual` is
/// `|R| / max(1, |x|∞)³`.
pub struct MinimalFamily {
    pub tested: usize,
    pub blown_up: usize,
    pub max_residual: f64,
    pub max_relative_residual: f64,
    pub max_mean_curvature: f64,
}

/// Falsification report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FalsifyReport {
    pub config: FalsifyConfig,
    pub splitting_rule: String,
    pub admissible: usize,
    pub skipped: usize,
    pub outcomes: Vec<SampleOutcome>,
    pub escape_times: Vec<f64>,
    pub min_escape: Option<f64>,
    pub median_escape: Option<f64>,
    pub flagged: usize,
    pub persistent_counterexamples: usize,
    pub a_minus_one: LocusProbe,
    pub minimal_family: MinimalFamily,
}

impl FalsifyReport {
    /// True when no admissible sample kept the residual at zero.
    pub fn passed(&self) -> bool {
        self.admissible > 0 && self.persistent_counterexamples == 0
    }
}

/// Draw admissible non-minimal Case I states on `I1 = I2 = R = 0`, integrate
/// and record when `|R|` leaves zero.
pub fn residual_falsify(lab: &Lab, cfg: &FalsifyConfig) -> Result<FalsifyReport, OdeError> {
    if lab.case != CaseTag::CaseI {
        return Err(OdeError::InvalidConfig("residual falsification runs on the Case I flow".into()));
    }
    if cfg.samples == 0 {
        return Err(OdeError::InvalidConfig("samples must be at least 1".into()));
    }
    let icfg = IntegrateConfig {
        t_max: cfg.t_max,
        step: cfg.step,
        margin_floor: Some(cfg.margin_floor),
        ..IntegrateConfig::default()
    };
    icfg.validate()?;
    let b = cfg.box_half_width;
    let mut outcomes = Vec::new();
    let mut skipped = 0;
    let mut locus = LocusProbe { tested: 0, margin_violations: 0, violated_margin: None };
    let mut family =
        MinimalFamily { tested: 0, blown_up: 0, max_residual: 0.0, max_relative_residual: 0.0, max_mean_curvature: 0.0 };
    for i in 0..cfg.samples {
        let mut rng = sample_rng(cfg.seed, i as u64);
        let mut start = None;
        for _ in 0..MAX_ATTEMPTS {
            let k1 = rng.gen_range(-b..=b);
            let k4 = rng.gen_range(-b..=b);
            let mut cands = project_on_residual(k1, k4);
            cands.retain(|x| lab.margin_violation(x, SAMPLE_MARGIN).is_none());
            if !cands.is_empty() {
                let pick = rng.gen_range(0..cands.len());
                start = Some(cands.swap_remove(pick));
                break;
            }
        }
        // The a = −1 locus: k1 = −k4 forces k3 = k1.
        let k4 = rng.gen_range(-b..=b);
        let on_locus = vec![-k4, -k4, k4, 1.0, k4 * k4];
        locus.tested += 1;
        if let Some((m, _)) = lab.margin_violation(&on_locus, SAMPLE_MARGIN) {
            locus.margin_violations += 1;
            locus.violated_margin.get_or_insert(m);
        }
        // The minimal family.
        let k1 = rng.gen_range(-b..=b);
        let r2 = std::f64::consts::SQRT_2 * k1;
        let minimal = vec![k1, -2.0 * k1, 0.0, r2, -r2];
        let traj = lab.integrate(&minimal, &IntegrateConfig { margin_floor: None, ..icfg.clone() })?;
        family.tested += 1;
        family.blown_up += usize::from(traj.halt.is_some());
        family.max_residual = family.max_residual.max(traj.max_abs("R").unwrap_or(0.0));
        for s in &traj.samples {
            family.max_relative_residual =
                family.max_relative_residual.max(s.monitors[2].abs() / sup_norm(&s.state).max(1.0).powi(3));
        }
        // On I2 = 0 the mean curvature is s1 = −2k4.
        let s1 = traj.samples.iter().map(|s| 2.0 * s.state[2].abs()).fold(0.0, f64::max);
        family.max_mean_curvature = family.max_mean_curvature.max(s1);

        let Some(x0) = start else {
            skipped += 1;
            continue;
        };
        let traj = lab.integrate(&x0, &icfg)?;
        let escape_time = traj.escape_time("R", cfg.tolerance);
        let reached_end = traj.halt.is_none() && (traj.last().t - cfg.t_max).abs() < 1e-12;
        outcomes.push(SampleOutcome {
            index: i,
            initial_residual: lab.monitors(&x0)[2],
            initial: x0,
            escape_time,
            max_residual: traj.max_abs("R").unwrap_or(0.0),
            persistent: escape_time.is_none() && reached_end,
            halt: traj.halt,
        });
    }
    if outcomes.is_empty() {
        return Err(OdeError::NoAdmissibleSample { draws: cfg.samples * MAX_ATTEMPTS });
    }
    let mut escape_times: Vec<f64> = outcomes.iter().filter_map(|o| o.escape_time).collect();
    escape_times.sort_by(f64::total_cmp);
    let median_escape = if escape_times.is_empty() {
        None
    } else {
        let n = escape_times.len();
        Some(if n % 2 == 1 { escape_times[n / 2] } else { 0.5 * (escape_times[n / 2 - 1] + escape_times[n / 2]) })
    };
    Ok(FalsifyReport {
        config: cfg.clone(),
        splitting_rule: "sample i uses ChaCha8 seeded with the run seed on stream i".into(),
        admissible: outcomes.len(),
        skipped,
        min_escape: escape_times.first().copied(),
        median_escape,
        escape_times,
        flagged: outcomes.iter().filter(|o| o.escape_time.is_none() && o.halt.is_some()).count(),
        persistent_counterexamples: outcomes.iter().filter(|o| o.persistent).count(),
        outcomes,
        a_minus_one: locus,
        minimal_family: family,
    })
}

/// Summary of the seeded invariant-drift experiment.
///
/// `I1` is quadratic in the state, so its absolute integration error grows
/// with the square of the state magnitude. Besides the raw maximum over the
/// whole run, the report therefore gives the maximum over the window in
/// which the trajectory stays inside the sampling box (the regime the drift
/// bounds are stated for) and the scale-free maximum `|I1| / max(1, |x|)²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub trajectories: usize,
    pub blown_up: usize,
    pub degenerate: usize,
    /// Trajectories that leave the sampling box before the end of the run.
    pub left_box: usize,
    pub max_i2_drift: f64,
    /// Maximum `|I1|` over whole runs.
    pub max_i1: f64,
    /// Maximum `|I1|` while `|x|∞ ≤ b`.
    pub max_i1_in_box: f64,
    /// Maximum `|I1| / max(1, |x|∞)²` over whole runs.
    pub max_i1_relative: f64,
}

fn sup_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// Integrate `count` seeded Case I trajectories started on `I1 = I2 = 0`
/// in the box `[−b, b]` and record the worst drift of both integrals.
pub fn invariant_drift(lab: &Lab, count: usize, seed: u64, b: f64, cfg: &IntegrateConfig) -> Result<InvariantReport, OdeError> {
    let mut rep = InvariantReport {
        trajectories: 0,
        blown_up: 0,
        degenerate: 0,
        left_box: 0,
        max_i2_drift: 0.0,
        max_i1: 0.0,
        max_i1_in_box: 0.0,
        max_i1_relative: 0.0,
    };
    for i in 0..count {
        let mut rng = sample_rng(seed, i as u64);
        let x0 = draw_case1_on_manifold(lab, &mut rng, b).ok_or(OdeError::NoAdmissibleSample { draws: MAX_ATTEMPTS })?;
        let traj = lab.integrate(&x0, cfg)?;
        rep.trajectories += 1;
        match traj.halt {
            Some(Halt::Degenerate { .. }) => rep.degenerate += 1,
            Some(_) => rep.blown_up += 1,
            None => {}
        }
        rep.max_i2_drift = rep.max_i2_drift.max(traj.drift("I2").unwrap_or(f64::INFINITY));
        rep.max_i1 = rep.max_i1.max(traj.max_abs("I1").unwrap_or(f64::INFINITY));
        let mut inside = true;
        for s in &traj.samples {
            let n = sup_norm(&s.state);
            let i1 = s.monitors[0].abs();
            inside &= n <= b;
            if inside {
                rep.max_i1_in_box = rep.max_i1_in_box.max(i1);
            }
            rep.max_i1_relative = rep.max_i1_relative.max(i1 / n.max(1.0).powi(2));
        }
        if !inside {
            rep.left_box += 1;
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly;
    use crate::closure::{derive_case1, derive_case2};
    use crate::elimination::{case2_residual, reduced_biharmonic};
    use std::sync::OnceLock;

    fn case1() -> &'static (FlowSystem, Lab) {
        static C: OnceLock<(FlowSystem, Lab)> = OnceLock::new();
        C.get_or_init(|| {
            let sys = FlowSystem::case1(&derive_case1().unwrap().catalog).unwrap();
            let lab = Lab::case1(&sys, &reduced_biharmonic(&sys).unwrap()).unwrap();
            (sys, lab)
        })
    }

    fn case2() -> (FlowSystem, Lab) {
        let (cat, _) = derive_case2().unwrap();
        let sys = FlowSystem::case2(&cat).unwrap();
        let lab = Lab::case2(&sys, &case2_residual(&sys).unwrap()).unwrap();
        (sys, lab)
    }

    #[test]
    fn case2_matches_closed_form() {
        let (_, lab) = case2();
        let traj = lab
            .integrate(&[0.0, 1.0], &IntegrateConfig { t_max: 0.9, margin_floor: None, ..Default::default() })
            .unwrap();
        let err = traj.samples.iter().map(|s| (s.state[1] - 1.0 / (1.0 + s.t)).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
        assert!(traj.samples.iter().all(|s| s.state[0] == 0.0 && s.monitors[0] == 0.0));
        assert!(traj.to_csv().starts_with("t,kappa,tau,R2\n"));
    }

    #[test]
    fn adaptive_matches_closed_form() {
        let (_, lab) = case2();
        let cfg = IntegrateConfig {
            t_max: 0.9,
            step: 0.05,
            sample_dt: Some(0.1),
            method: Method::Adaptive,
            tolerance: 1e-11,
            margin_floor: None,
            ..Default::default()
        };
        let traj = lab.integrate(&[0.0, 1.0], &cfg).unwrap();
        assert_eq!(traj.samples.len(), 10);
        let err = traj.samples.iter().map(|s| (s.state[1] - 1.0 / (1.0 + s.t)).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn riccati_blow_up_is_flagged() {
        let (_, lab) = case2();
        // tau' = -tau^2 from tau = -1 escapes at t = 1.
        let traj = lab.integrate(&[0.0, -1.0], &IntegrateConfig { t_max: 2.0, margin_floor: None, ..Default::default() }).unwrap();
        match traj.halt {
            Some(Halt::BlowUp { t, .. }) => assert!((t - 1.0).abs() < 1e-2, "{t}"),
            other => panic!("expected blow-up, got {other:?}"),
        }
        assert!(traj.ensure_complete().is_err());
    }

    #[test]
    fn zero_state_is_fixed() {
        let (_, lab) = case2();
        let traj = lab.integrate(&[0.0, 0.0], &IntegrateConfig { margin_floor: None, ..Default::default() }).unwrap();
        assert!(traj.samples.iter().all(|s| s.state == vec![0.0, 0.0]));
        let (_, lab1) = case1();
        let traj = lab1.integrate(&[0.0; 5], &IntegrateConfig { margin_floor: None, ..Default::default() }).unwrap();
        assert!(traj.samples.iter().all(|s| s.state == vec![0.0; 5]));
    }

    #[test]
    fn degenerate_entry_rejected() {
        let (_, lab) = case1();
        let err = lab.integrate(&[0.5, 0.5, 0.1, 0.2, 1.25], &IntegrateConfig::default()).unwrap_err();
        assert!(matches!(err, OdeError::DegenerateEntry { ref margin, .. } if margin == "k1-k3"));
        assert!(lab.integrate(&[0.1, 0.2], &IntegrateConfig::default()).is_err());
        assert!(lab.integrate(&[0.1; 5], &IntegrateConfig { step: 0.0, ..Default::default() }).is_err());
    }

    #[test]
    fn monitors_match_constraints() {
        let (sys, lab) = case1();
        let x = [0.3, -0.9, 0.1, 0.4, -0.675];
        let m = lab.monitors(&x);
        let i1 = lab.eval(sys.constraint("product").unwrap(), &x).unwrap();
        let i2 = lab.eval(sys.constraint("trace").unwrap(), &x).unwrap();
        assert!((m[0].abs() - i1.abs()).abs() < 1e-15);
        assert!((m[1].abs() - i2.abs()).abs() < 1e-15);
    }

    #[test]
    fn invariants_hold_along_flow() {
        let (_, lab) = case1();
        let rep = invariant_drift(lab, 10, 7, 1.0, &IntegrateConfig::default()).unwrap();
        assert!(rep.max_i2_drift < 1e-10, "{rep:?}");
        assert!(rep.max_i1_in_box < 1e-9, "{rep:?}");
        assert!(rep.max_i1_relative < 1e-9, "{rep:?}");
    }

    #[test]
    fn projection_zeroes_residual() {
        let (_, lab) = case1();
        let mut found = 0;
        for (k1, k4) in [(0.3, 0.7), (-0.4, 0.2), (0.9, -0.5), (0.1, 0.8)] {
            for x in project_on_residual(k1, k4) {
                let m = lab.monitors(&x);
                assert!(m.iter().all(|v| v.abs() < 1e-12), "{x:?} {m:?}");
                found += 1;
            }
        }
        assert!(found > 0);
    }

    #[test]
    fn falsification_is_deterministic_and_finds_no_counterexample() {
        let (_, lab) = case1();
        let cfg = FalsifyConfig { samples: 8, seed: 3, ..Default::default() };
        let a = residual_falsify(lab, &cfg).unwrap();
        let b = residual_falsify(lab, &cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.passed(), "{a:?}");
        assert_eq!(a.a_minus_one.margin_violations, a.a_minus_one.tested);
        assert!(a.minimal_family.max_relative_residual < 1e-12);
        assert_eq!(a.minimal_family.max_mean_curvature, 0.0);
    }

    #[test]
    fn fd_converges_quadratically() {
        let (sys, lab) = case1();
        let mut rng = sample_rng(11, 0);
        let x0 = draw_case1_on_manifold(lab, &mut rng, 1.0).unwrap();
        let k4 = poly("k4");
        let d1 = fd_crosscheck(lab, &k4, sys, &x0, 0.02).unwrap();
        let d2 = fd_crosscheck(lab, &k4, sys, &x0, 0.01).unwrap();
        let ratio = d1.discrepancy / d2.discrepancy;
        assert!((3.5..=4.5).contains(&ratio), "{ratio} {d1:?} {d2:?}");
        let i2 = fd_crosscheck(lab, &poly("2*k1 + k3 + 3*k4"), sys, &x0, 0.01).unwrap();
        assert_eq!(i2.symbolic, 0.0);
        assert!(i2.numeric.abs() < 1e-12);
        assert!(fd_crosscheck(lab, &poly("kappa"), sys, &x0, 0.01).is_err());
    }
}
