//! Replayable step records.
//!
//! Every derivation, elimination and numeric check appends [`Step`]s to a
//! [`Certificate`]. A step records the operation, its textual inputs, the
//! expected result (when a published or independently known form exists),
//! the obtained result and a verdict. Certificates serialize to a versioned
//! JSON schema; [`recheck_step`] re-executes self-contained operations from
//! their recorded inputs alone, and [`compare_runs`] diffs two certificates
//! step by step.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{gcd_poly, resultant, JetSym, Poly, Rat};
use crate::frame::CaseTag;

/// Schema identifier written into every serialized certificate bundle.
pub const SCHEMA_VERSION: &str = "biharm-trace/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Obtained result equals the expected one (up to the documented
    /// normalization of the step).
    Certified,
    /// No expected form; the obtained result is recorded as derived.
    Derived,
    /// The generated constraint is identically zero.
    Vacuous,
    /// The expected (published) form disagrees with the obtained one; the
    /// obtained form is the one used downstream and the diff is recorded.
    Diff,
    /// A branch hypothesis leads to a contradiction and is closed.
    Closed,
    /// An internal check failed.
    Failed,
}

impl Verdict {
    pub fn is_failure(self) -> bool {
        self == Verdict::Failed
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Certified => "certified",
            Verdict::Derived => "derived",
            Verdict::Vacuous => "vacuous",
            Verdict::Diff => "diff",
            Verdict::Closed => "closed",
            Verdict::Failed => "failed",
        };
        f.write_str(s)
    }
}

/// One recorded operation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    #[serde(rename = "step-id")]
    pub id: String,
    pub operation: String,
    pub inputs: BTreeMap<String, String>,
    pub expected: Option<String>,
    pub obtained: String,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Step {
    pub fn new(id: impl Into<String>, operation: impl Into<String>) -> Self {
        Step {
            id: id.into(),
            operation: operation.into(),
            inputs: BTreeMap::new(),
            expected: None,
            obtained: String::new(),
            verdict: Verdict::Derived,
            note: None,
        }
    }

    pub fn input(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.inputs.insert(key.to_string(), value.to_string());
        self
    }

    pub fn expected(mut self, e: impl fmt::Display) -> Self {
        self.expected = Some(e.to_string());
        self
    }

    pub fn obtained(mut self, o: impl fmt::Display) -> Self {
        self.obtained = o.to_string();
        self
    }

    pub fn verdict(mut self, v: Verdict) -> Self {
        self.verdict = v;
        self
    }

    pub fn note(mut self, n: impl Into<String>) -> Self {
        self.note = Some(n.into());
        self
    }

    /// `Certified` if `ok`, otherwise `Failed`.
    pub fn check(self, ok: bool) -> Self {
        self.verdict(if ok { Verdict::Certified } else { Verdict::Failed })
    }
}

/// An ordered list of steps for one pipeline.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub name: String,
    pub case: Option<CaseTag>,
    pub steps: Vec<Step>,
    /// Human-readable conclusion of the pipeline.
    pub conclusion: String,
}

impl Certificate {
    pub fn new(name: impl Into<String>, case: Option<CaseTag>) -> Self {
        Certificate { name: name.into(), case, steps: Vec::new(), conclusion: String::new() }
    }

    pub fn push(&mut self, step: Step) -> &Step {
        self.steps.push(step);
        self.steps.last().expect("just pushed")
    }

    pub fn step(&self, id: &str) -> Option<&Step> {
        self.steps.iter().find(|s| s.id == id)
    }

    pub fn failures(&self) -> Vec<&Step> {
        self.steps.iter().filter(|s| s.verdict.is_failure()).collect()
    }

    pub fn diffs(&self) -> Vec<&Step> {
        self.steps.iter().filter(|s| s.verdict == Verdict::Diff).collect()
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }

    /// Plain-text rendering, one step per line.
    pub fn render_text(&self) -> String {
        let mut out = format!("== {} ==\n", self.name);
        for s in &self.steps {
            out.push_str(&format!("[{:>9}] {:<40} {}\n", s.verdict.to_string(), s.id, short(&s.obtained, 100)));
            if let Some(n) = &s.note {
                out.push_str(&format!("            note: {}\n", n));
            }
        }
        out.push_str(&format!("conclusion: {}\n", self.conclusion));
        out
    }
}

fn short(s: &str, n: usize) -> String {
    if s.chars().count() <= n {
        s.to_string()
    } else {
        let head: String = s.chars().take(n).collect();
        format!("{head}…")
    }
}

/// A serialized set of certificates with its schema version.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceBundle {
    pub schema: String,
    pub certificates: Vec<Certificate>,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("malformed trace: {0}")]
    Malformed(String),
    #[error("unsupported trace schema {found:?} (expected {expected:?})")]
    Schema { found: String, expected: String },
}

impl TraceBundle {
    pub fn new(certificates: Vec<Certificate>) -> Self {
        TraceBundle { schema: SCHEMA_VERSION.to_string(), certificates }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace bundles always serialize")
    }

    /// Parse and validate a bundle: the schema version must match, there is at
    /// least one certificate and every step has a non-empty id and operation.
    pub fn from_json(s: &str) -> Result<Self, TraceError> {
        let v: serde_json::Value = serde_json::from_str(s).map_err(|e| TraceError::Malformed(e.to_string()))?;
        let found = v.get("schema").and_then(|x| x.as_str()).unwrap_or("").to_string();
        if found != SCHEMA_VERSION {
            return Err(TraceError::Schema { found, expected: SCHEMA_VERSION.to_string() });
        }
        let b: TraceBundle = serde_json::from_value(v).map_err(|e| TraceError::Malformed(e.to_string()))?;
        if b.certificates.is_empty() {
            return Err(TraceError::Malformed("trace contains no certificates".into()));
        }
        for c in &b.certificates {
            for st in &c.steps {
                if st.id.is_empty() || st.operation.is_empty() {
                    return Err(TraceError::Malformed(format!("step without id/operation in {}", c.name)));
                }
            }
        }
        Ok(b)
    }
}

/// Outcome of re-executing a self-contained step from its recorded inputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Recheck {
    /// The operation is not self-contained (it needs a catalog or a run).
    NotApplicable,
    Agrees,
    Disagrees { recomputed: String },
    BadInput(String),
}

fn input_poly(step: &Step, key: &str) -> Result<Poly, String> {
    let s = step.inputs.get(key).ok_or_else(|| format!("missing input {key}"))?;
    Poly::parse(s).map_err(|e| format!("input {key}: {e}"))
}

/// Re-execute `resultant`, `gcd`, `eval` and `product` steps from their
/// recorded inputs and compare with the recorded result.
pub fn recheck_step(step: &Step) -> Recheck {
    let recomputed: Result<String, String> = (|| match step.operation.as_str() {
        "resultant" => {
            let p = input_poly(step, "p")?;
            let q = input_poly(step, "q")?;
            let v: JetSym = step.inputs.get("var").ok_or("missing var")?.parse().map_err(|e| format!("{e}"))?;
            resultant(&p, &q, &v).map(|r| r.to_string()).map_err(|e| e.to_string())
        }
        "gcd" => {
            let p = input_poly(step, "p")?;
            let q = input_poly(step, "q")?;
            Ok(gcd_poly(&p, &q).map_err(|e| e.to_string())?.to_string())
        }
        "eval" => {
            let p = input_poly(step, "p")?;
            let at: Rat = step.inputs.get("at").ok_or("missing at")?.parse().map_err(|e| format!("{e}"))?;
            p.eval_rational(&at).map(|r| r.to_string()).map_err(|e| e.to_string())
        }
        "product" => {
            let p = input_poly(step, "p")?;
            let q = input_poly(step, "q")?;
            Ok((&p * &q).to_string())
        }
        _ => Err(String::new()),
    })();
    match recomputed {
        Err(e) if e.is_empty() => Recheck::NotApplicable,
        Err(e) => Recheck::BadInput(e),
        Ok(r) if r == step.obtained => Recheck::Agrees,
        Ok(r) => Recheck::Disagrees { recomputed: r },
    }
}

/// A disagreement between a recorded run and a fresh run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepMismatch {
    pub certificate: String,
    pub step: String,
    pub field: String,
    pub recorded: String,
    pub fresh: String,
}

/// Compare two runs step by step: certificates matched by name and case,
/// then the same step ids in the same order with the same operation, inputs,
/// expected, obtained and verdict.
pub fn compare_runs(recorded: &[Certificate], fresh: &[Certificate]) -> Vec<StepMismatch> {
    let mut out = Vec::new();
    let mk = |c: &str, s: &str, f: &str, r: String, n: String| StepMismatch {
        certificate: c.to_string(),
        step: s.to_string(),
        field: f.to_string(),
        recorded: r,
        fresh: n,
    };
    for rc in recorded {
        let Some(fc) = fresh.iter().find(|c| c.name == rc.name && c.case == rc.case) else {
            out.push(mk(&rc.name, "-", "certificate", rc.name.clone(), "<absent>".into()));
            continue;
        };
        let n = rc.steps.len().max(fc.steps.len());
        for k in 0..n {
            match (rc.steps.get(k), fc.steps.get(k)) {
                (Some(a), Some(b)) => {
                    if a.id != b.id {
                        out.push(mk(&rc.name, &a.id, "step-id", a.id.clone(), b.id.clone()));
                        break;
                    }
                    let fields: [(&str, String, String); 5] = [
                        ("operation", a.operation.clone(), b.operation.clone()),
                        ("inputs", format!("{:?}", a.inputs), format!("{:?}", b.inputs)),
                        ("expected", format!("{:?}", a.expected), format!("{:?}", b.expected)),
                        ("obtained", a.obtained.clone(), b.obtained.clone()),
                        ("verdict", a.verdict.to_string(), b.verdict.to_string()),
                    ];
                    for (f, x, y) in fields {
                        if x != y {
                            out.push(mk(&rc.name, &a.id, f, x, y));
                        }
                    }
                }
                (Some(a), None) => out.push(mk(&rc.name, &a.id, "step", a.id.clone(), "<absent>".into())),
                (None, Some(b)) => out.push(mk(&rc.name, &b.id, "step", "<absent>".into(), b.id.clone())),
                (None, None) => {}
            }
        }
    }
    for fc in fresh {
        if !recorded.iter().any(|c| c.name == fc.name && c.case == fc.case) {
            out.push(mk(&fc.name, "-", "certificate", "<absent>".into(), fc.name.clone()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Certificate {
        let mut c = Certificate::new("demo", Some(CaseTag::CaseI));
        c.push(Step::new("r1", "resultant").input("p", "x - a").input("q", "x - b").input("var", "x").obtained("a - b"));
        c.push(Step::new("e1", "eval").input("p", "a^2 - 2").input("at", "3").obtained("7").check(true));
        c
    }

    #[test]
    fn json_round_trip_and_schema_check() {
        let b = TraceBundle::new(vec![sample()]);
        let s = b.to_json();
        assert!(s.contains("\"step-id\""));
        assert_eq!(TraceBundle::from_json(&s).unwrap(), b);
        let bad = s.replace(SCHEMA_VERSION, "other/9");
        assert!(matches!(TraceBundle::from_json(&bad), Err(TraceError::Schema { .. })));
        assert!(matches!(TraceBundle::from_json("{\"schema\": 3"), Err(TraceError::Malformed(_))));
    }

    #[test]
    fn recheck_detects_tampering() {
        let c = sample();
        assert_eq!(recheck_step(&c.steps[0]), Recheck::Agrees);
        assert_eq!(recheck_step(&c.steps[1]), Recheck::Agrees);
        let mut t = c.steps[0].clone();
        t.obtained = "b - a".into();
        assert!(matches!(recheck_step(&t), Recheck::Disagrees { .. }));
        assert_eq!(recheck_step(&Step::new("x", "reduce")), Recheck::NotApplicable);
    }

    #[test]
    fn compare_runs_reports_first_divergence() {
        let a = sample();
        let mut b = sample();
        assert!(compare_runs(&[a.clone()], &[b.clone()]).is_empty());
        b.steps[1].obtained = "8".into();
        let d = compare_runs(&[a], &[b]);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].step, "e1");
        assert_eq!(d[0].field, "obtained");
    }
}
