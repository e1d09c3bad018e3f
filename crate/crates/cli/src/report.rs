//! The run report and its text rendering.

use std::fmt::Write as _;

use biharm_core::ode::Halt;
use biharm_core::pipeline::{CaseReport, NumericConfig, NumericSummary, ReplayOutcome};
use serde::Serialize;

/// Schema identifier of the JSON report.
pub const REPORT_SCHEMA: &str = "biharm-report/1";

/// Everything one invocation produced.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: String,
    pub tool: String,
    /// Seconds since the Unix epoch; the only field that varies between
    /// identical runs.
    pub generated_at: u64,
    pub command: String,
    pub cases: Vec<CaseReport>,
    pub numeric_config: Option<NumericConfig>,
    pub numeric: Vec<NumericSummary>,
    pub replay: Option<ReplayOutcome>,
    pub trace: Option<String>,
    pub outputs: Vec<String>,
    pub errors: Vec<String>,
    pub exit_code: i32,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            schema: REPORT_SCHEMA.into(),
            tool: format!("biharm {}", env!("CARGO_PKG_VERSION")),
            generated_at: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            command: command.into(),
            cases: Vec::new(),
            numeric_config: None,
            numeric: Vec::new(),
            replay: None,
            trace: None,
            outputs: Vec::new(),
            errors: Vec::new(),
            exit_code: 0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn render_text(&self) -> String {
        let mut o = String::new();
        let _ = writeln!(o, "{} — {}", self.tool, self.command);
        for c in &self.cases {
            let _ = writeln!(o, "\n== {} ==", c.case);
            let _ = writeln!(o, "verdict: {}", c.verdict);
            let _ = writeln!(o, "certificates verified: {}", c.certificates_verified);
            for f in &c.failed_steps {
                let _ = writeln!(o, "  FAILED {f}");
            }
            let _ = writeln!(o, "catalog: {} relations", c.catalog.len());
            let _ = writeln!(o, "flow:");
            for f in &c.flow {
                let _ = writeln!(o, "  {f}");
            }
            if let Some(r) = &c.residual {
                let _ = writeln!(o, "residual along the flow: {r}");
            }
            if let Some(ob) = &c.obstruction {
                let _ = writeln!(o, "reduced biharmonic: {}", ob.reduced_biharmonic);
                let _ = writeln!(o, "eliminant (k4^{} removed): {}", ob.k4_power, ob.eliminant);
                for f in &ob.stripped_factors {
                    let _ = writeln!(o, "  stripped {f}");
                }
                let _ = writeln!(o, "core: {}", ob.core);
                for (a, b) in &ob.core_root_intervals {
                    let _ = writeln!(o, "  real root in [{a}, {b}]");
                }
                let _ = writeln!(o, "degree-9 comparison:");
                let _ = writeln!(o, "  published: {}", ob.published);
                let _ = writeln!(o, "  divides the eliminant: {}", ob.published_divides);
                let _ = writeln!(o, "  elimination orders agree: {}", ob.orders_agree);
            }
            if !c.diffs.is_empty() {
                let _ = writeln!(o, "recorded diffs ({}):", c.diffs.len());
                for d in &c.diffs {
                    let _ = writeln!(o, "  {}/{}: {}", d.certificate, d.step, d.note.as_deref().unwrap_or("expected form differs"));
                }
            }
        }
        for n in &self.numeric {
            let _ = writeln!(o, "\n== numeric {} ==", n.case);
            if let Some(i) = &n.invariants {
                let _ = writeln!(
                    o,
                    "invariants: {} trajectories ({} blow-up, {} degenerate, {} leave the box); max |I2 drift| = {:e}",
                    i.trajectories, i.blown_up, i.degenerate, i.left_box, i.max_i2_drift
                );
                let _ = writeln!(
                    o,
                    "  max |I1|: {:e} inside the box, {:e} over whole runs, {:e} relative to |x|^2",
                    i.max_i1_in_box, i.max_i1, i.max_i1_relative
                );
            }
            if let Some(f) = &n.falsification {
                let _ = writeln!(
                    o,
                    "falsification: {} admissible samples (box ±{}), {} escaped, {} flagged, {} persistent",
                    f.admissible,
                    f.config.box_half_width,
                    f.escape_times.len(),
                    f.flagged,
                    f.persistent_counterexamples
                );
                let fmt = |x: Option<f64>| x.map(|v| format!("{v}")).unwrap_or_else(|| "-".into());
                let _ = writeln!(o, "  escape time min {} / median {}", fmt(f.min_escape), fmt(f.median_escape));
                let halts: Vec<&str> = f.outcomes.iter().filter_map(|s| s.halt.as_ref().map(Halt::label)).collect();
                if !halts.is_empty() {
                    let _ = writeln!(o, "  halts: {}", halts.join(", "));
                }
                let _ = writeln!(
                    o,
                    "  a = -1 locus: {}/{} margin violations ({})",
                    f.a_minus_one.margin_violations,
                    f.a_minus_one.tested,
                    f.a_minus_one.violated_margin.as_deref().unwrap_or("-")
                );
                let _ = writeln!(
                    o,
                    "  minimal family (excluded): {} runs ({} blow-up), max |R| = {:e}, max |R|/|x|^3 = {:e}, max |s1| = {:e}",
                    f.minimal_family.tested,
                    f.minimal_family.blown_up,
                    f.minimal_family.max_residual,
                    f.minimal_family.max_relative_residual,
                    f.minimal_family.max_mean_curvature
                );
            }
            if let Some(fd) = &n.finite_differences {
                let _ = writeln!(
                    o,
                    "finite differences: {} states, h = {}, ratio in [{:.4}, {:.4}], formula gap {:e}",
                    fd.points, fd.h, fd.min_ratio, fd.max_ratio, fd.max_formula_gap
                );
            }
            if let Some(c) = &n.closed_form {
                let _ = writeln!(
                    o,
                    "closed form tau0/(1+tau0 t), tau0 = {}, t <= {}: max error {:e}; max |R2| = {:e}",
                    c.tau0, c.t_max, c.max_error, c.max_residual
                );
            }
            let _ = writeln!(o, "passed: {}", n.passed);
        }
        if let Some(r) = &self.replay {
            let _ = writeln!(o, "\n== replay ==");
            let _ = writeln!(o, "cases: {}", r.cases.join(", "));
            let _ = writeln!(o, "steps: {}, re-executed from inputs: {}", r.steps, r.rechecked);
            for (c, v) in &r.verdicts {
                let _ = writeln!(o, "verdict {c}: {v}");
            }
            for m in &r.mismatches {
                let _ = writeln!(o, "MISMATCH {}/{} [{}]: recorded {} / fresh {}", m.certificate, m.step, m.field, m.recorded, m.fresh);
            }
        }
        if let Some(t) = &self.trace {
            let _ = writeln!(o, "\ntrace written to {t}");
        }
        for p in &self.outputs {
            let _ = writeln!(o, "wrote {p}");
        }
        for e in &self.errors {
            let _ = writeln!(o, "error: {e}");
        }
        let _ = writeln!(o, "exit code: {}", self.exit_code);
        o
    }
}
