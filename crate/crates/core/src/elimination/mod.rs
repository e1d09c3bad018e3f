//! The endgame along the `e4`-flow.
//!
//! Once the transversal directions are frozen, every scalar of the problem
//! evolves along the integral curves of `e4`. A [`FlowSystem`] collects the
//! state symbols, their `e4`-derivatives (read off a certified catalog), the
//! algebraic constraints and the side conditions. On top of it:
//!
//! * [`flow_differentiate`] applies `e4` by the Leibniz rule;
//! * [`check_closure`] certifies that the constraint variety is invariant;
//! * [`case1_obstruction`] differentiates the biharmonic equation along the
//!   flow, eliminates `xi`, `eta` and `e4(k4)` by resultants and returns a
//!   univariate polynomial in the ratio `a = k1/k4`;
//! * [`case1_contradiction`] shows that no admissible ratio survives;
//! * [`case2_collapse`] reduces the Case II equation to a multiple of `κ³`.

mod case1;
mod case2;

pub use case1::{
    case1_contradiction, case1_obstruction, companion_system, reduced_biharmonic, FactorLog, Obstruction,
    PUBLISHED_OBSTRUCTION,
};
pub use case2::{case2_collapse, case2_residual};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{sym, AlgebraError, GroebnerBasis, JetSym, Poly};
use crate::certificate::{Certificate, Step, Verdict};
use crate::closure::{orient, reduce, Catalog, ClosureError, NamedPoly};
use crate::frame::{apply_direction, CaseTag};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ElimError {
    #[error("symbol {0} is not a state symbol of the flow system")]
    ForeignSymbol(String),
    #[error("the catalog does not close the flow of {0}")]
    FlowNotClosed(String),
    #[error("resultant vanished identically at step {step}: dependent pair")]
    EliminationCollapse { step: String },
    #[error("companion system does not determine the ratio: {residual}")]
    IncompleteClosure { residual: String },
    #[error("missing catalog constraint {0}")]
    MissingConstraint(String),
    #[error(transparent)]
    Closure(#[from] ClosureError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// The `e4`-flow of one case.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlowSystem {
    pub case: CaseTag,
    /// State symbols: `(k1, k3, k4, xi, eta)` or `(kappa, tau)`.
    pub state: Vec<JetSym>,
    /// Auxiliary symbols with their own flow (`e4(k4)` in Case I).
    pub auxiliary: Vec<JetSym>,
    /// `e4` of every state and auxiliary symbol.
    pub flows: BTreeMap<JetSym, Poly>,
    /// Algebraic constraints (each `= 0`).
    pub constraints: Vec<NamedPoly>,
    /// Side conditions (each `≠ 0`).
    pub side: Vec<NamedPoly>,
    /// The scalar biharmonic equation, with `e4`-jets of state symbols.
    pub biharmonic: Poly,
}

impl FlowSystem {
    /// The Case I flow read off the Case I catalog.
    pub fn case1(cat: &Catalog) -> Result<Self, ElimError> {
        let state = vec![sym::k1(), sym::k3(), sym::k4(), sym::xi(), sym::eta()];
        let e = sym::d(&[4], sym::k4());
        let mut sys = FlowSystem {
            case: CaseTag::CaseI,
            state: state.clone(),
            auxiliary: vec![e.clone()],
            flows: BTreeMap::new(),
            constraints: Vec::new(),
            side: cat.register.clone(),
            biharmonic: Poly::zero(),
        };
        for s in [sym::k1(), sym::k3(), sym::xi(), sym::eta()] {
            let flow = sys.closed_flow(&s, cat)?;
            sys.flows.insert(s, flow);
        }
        sys.flows.insert(sym::k4(), Poly::var(e.clone()));
        // e4 e4(k4) from the derivative of the trace relation along the flow.
        let tf = constraint(cat, "trace-flow")?;
        let ee = sym::d(&[4, 4], sym::k4());
        let nf = reduce(&apply_direction(4, &tf), cat)?.poly;
        let (init, tail) = orient(&nf, &ee, cat, "e4(trace-flow)")?;
        let c = init.as_constant().ok_or_else(|| ElimError::FlowNotClosed(ee.to_string()))?;
        sys.flows.insert(e.clone(), tail.scale(&-c.recip()?));
        sys.constraints = vec![
            NamedPoly { id: "trace".into(), poly: constraint(cat, "trace")? },
            NamedPoly { id: "product".into(), poly: -&constraint(cat, "product")? },
            NamedPoly { id: "trace-flow".into(), poly: tf },
        ];
        sys.biharmonic = constraint(cat, "biharmonic")?;
        sys.check_symbols()?;
        Ok(sys)
    }

    /// The Case II flow read off the Case II catalog.
    pub fn case2(cat: &Catalog) -> Result<Self, ElimError> {
        let mut sys = FlowSystem {
            case: CaseTag::CaseII,
            state: vec![sym::kappa(), sym::tau()],
            auxiliary: Vec::new(),
            flows: BTreeMap::new(),
            constraints: Vec::new(),
            side: cat.register.clone(),
            biharmonic: constraint(cat, "biharmonic")?,
        };
        for s in [sym::kappa(), sym::tau()] {
            let flow = sys.closed_flow(&s, cat)?;
            sys.flows.insert(s, flow);
        }
        sys.check_symbols()?;
        Ok(sys)
    }

    fn closed_flow(&self, s: &JetSym, cat: &Catalog) -> Result<Poly, ElimError> {
        let red = reduce(&Poly::var(sym::d(&[4], s.clone())), cat)?;
        if !red.multiplier.is_empty() {
            return Err(ElimError::FlowNotClosed(s.to_string()));
        }
        Ok(red.poly)
    }

    fn check_symbols(&self) -> Result<(), ElimError> {
        for (s, f) in &self.flows {
            if let Some(bad) = f.symbols().into_iter().find(|x| !self.is_symbol(x)) {
                return Err(ElimError::FlowNotClosed(format!("{s} (mentions {bad})")));
            }
        }
        Ok(())
    }

    /// All symbols of the system (state and auxiliary).
    pub fn symbols(&self) -> Vec<JetSym> {
        self.state.iter().chain(&self.auxiliary).cloned().collect()
    }

    pub fn is_symbol(&self, s: &JetSym) -> bool {
        self.state.contains(s) || self.auxiliary.contains(s)
    }

    /// Replace every `e4`-jet `D4…D4 s` of a system symbol by the iterated
    /// flow derivative of `s`.
    pub fn eliminate_jets(&self, p: &Poly) -> Result<Poly, ElimError> {
        let mut bind = BTreeMap::new();
        for s in p.symbols() {
            if self.is_symbol(&s) {
                continue;
            }
            bind.insert(s.clone(), self.jet_value(&s)?);
        }
        Ok(p.substitute_unchecked(&bind))
    }

    fn jet_value(&self, s: &JetSym) -> Result<Poly, ElimError> {
        if self.is_symbol(s) {
            return Ok(Poly::var(s.clone()));
        }
        match s.word.first() {
            Some(4) => {
                let inner = JetSym::with_word(s.base.clone(), s.word[1..].to_vec());
                flow_differentiate(&self.jet_value(&inner)?, self)
            }
            _ => Err(ElimError::ForeignSymbol(s.to_string())),
        }
    }

    /// The flow as a vector field on the state alone: auxiliary symbols are
    /// solved from the constraints that define them (Case I: `e4(k4)` from
    /// the trace relation along the flow).
    pub fn vector_field(&self) -> Result<BTreeMap<JetSym, Poly>, ElimError> {
        let bind = self.auxiliary_solution()?;
        Ok(self
            .state
            .iter()
            .map(|s| (s.clone(), self.flows[s].substitute_unchecked(&bind)))
            .collect())
    }

    /// Each auxiliary symbol as a polynomial in the state.
    pub fn auxiliary_solution(&self) -> Result<BTreeMap<JetSym, Poly>, ElimError> {
        let mut bind = BTreeMap::new();
        for a in &self.auxiliary {
            let c = self
                .constraints
                .iter()
                .find(|c| c.poly.degree_in(a) == 1 && c.poly.coeffs_in(a)[1].is_constant())
                .ok_or_else(|| ElimError::FlowNotClosed(a.to_string()))?;
            let co = c.poly.coeffs_in(a);
            let lead = co[1].as_constant().expect("constant coefficient");
            bind.insert(a.clone(), co[0].scale(&-lead.recip()?));
        }
        Ok(bind)
    }

    /// Leibniz derivative along the state vector field.
    pub fn field_derivative(&self, c: &Poly) -> Result<Poly, ElimError> {
        let field = self.vector_field()?;
        let mut out = Poly::zero();
        for s in c.symbols() {
            let f = field.get(&s).ok_or_else(|| ElimError::ForeignSymbol(s.to_string()))?;
            out = &out + &(&c.diff(&s) * f);
        }
        Ok(out)
    }

    pub fn constraint(&self, id: &str) -> Option<&Poly> {
        self.constraints.iter().find(|c| c.id == id).map(|c| &c.poly)
    }

    /// The trace relation solved for `k3` (Case I).
    pub fn trace_substitution(&self) -> BTreeMap<JetSym, Poly> {
        let mut m = BTreeMap::new();
        if let Some(t) = self.constraint("trace") {
            let co = t.coeffs_in(&sym::k3());
            if co.len() == 2 {
                if let Some(l) = co[1].as_constant() {
                    m.insert(sym::k3(), co[0].scale(&-l.recip().expect("nonzero")));
                }
            }
        }
        m
    }

    /// One line per flow rule.
    pub fn summary(&self) -> Vec<String> {
        self.flows.iter().map(|(s, f)| format!("e4({s}) = {f}")).collect()
    }
}

fn constraint(cat: &Catalog, id: &str) -> Result<Poly, ElimError> {
    cat.constraint(id).cloned().ok_or_else(|| ElimError::MissingConstraint(id.into()))
}

/// `e4(c)` by the Leibniz rule and the flow rules. `c` may mention only
/// state and auxiliary symbols.
pub fn flow_differentiate(c: &Poly, sys: &FlowSystem) -> Result<Poly, ElimError> {
    let syms: BTreeSet<JetSym> = c.symbols();
    let mut out = Poly::zero();
    for s in syms {
        let f = sys.flows.get(&s).ok_or_else(|| ElimError::ForeignSymbol(s.to_string()))?;
        out = &out + &(&c.diff(&s) * f);
    }
    Ok(out)
}

/// One closure verdict: `e4(constraint)` lies in the ideal of the
/// constraints, with an explicit cofactor when it is a multiple of the
/// constraint itself.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureCheck {
    pub id: String,
    pub derivative: Poly,
    pub cofactor: Option<Poly>,
    pub in_ideal: bool,
}

/// Certify that the constraint variety is invariant under the flow.
pub fn check_closure(sys: &FlowSystem) -> Result<(Vec<ClosureCheck>, Certificate), ElimError> {
    let mut cert = Certificate::new("flow-closure", Some(sys.case));
    let gens: Vec<Poly> = sys.constraints.iter().map(|c| c.poly.clone()).collect();
    let gb = GroebnerBasis::new(&gens, &sys.symbols())?;
    let mut out = Vec::new();
    for c in &sys.constraints {
        let d = flow_differentiate(&c.poly, sys)?;
        let cofactor = if d.is_zero() { Some(Poly::zero()) } else { d.div_exact(&c.poly) };
        let in_ideal = gb.contains(&d)?;
        let mut step = Step::new(format!("e4({})", c.id), "flow-differentiate")
            .input("constraint", &c.poly)
            .obtained(&d)
            .check(in_ideal);
        step = match &cofactor {
            Some(q) => step.note(format!("e4(c) = ({q}) * c")),
            None => step.note("e4(c) lies in the ideal of the constraints"),
        };
        cert.push(step);
        out.push(ClosureCheck { id: c.id.clone(), derivative: d, cofactor, in_ideal });
    }
    // Along the state vector field the trace relation is a first integral.
    if let Some(t) = sys.constraint("trace") {
        let d = sys.field_derivative(t)?;
        cert.push(
            Step::new("field(trace)", "flow-differentiate")
                .input("constraint", t)
                .expected("0")
                .obtained(&d)
                .check(d.is_zero()),
        );
    }
    cert.conclusion = if cert.passed() { "constraint variety invariant".into() } else { "closure failed".into() };
    Ok((out, cert))
}

/// Total weight of every term under the given symbol weights, or `None`
/// when the polynomial is not weighted-homogeneous.
pub fn weighted_degree(p: &Poly, weight: impl Fn(&JetSym) -> u32) -> Option<u32> {
    let mut w = None;
    for (m, _) in p.terms() {
        let d: u32 = m.factors().iter().map(|(s, e)| weight(s) * e).sum();
        match w {
            None => w = Some(d),
            Some(v) if v != d => return None,
            _ => {}
        }
    }
    w
}

pub(crate) fn verdict_of(ok: bool) -> Verdict {
    if ok {
        Verdict::Certified
    } else {
        Verdict::Diff
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly;
    use crate::closure::{derive_case1, derive_case2};

    fn sys1() -> FlowSystem {
        FlowSystem::case1(&derive_case1().unwrap().catalog).unwrap()
    }

    #[test]
    fn case1_flow_rules() {
        let s = sys1();
        assert_eq!(s.flows[&sym::k1()], poly("xi*(k4 - k1)"));
        assert_eq!(s.flows[&sym::xi()], poly("-xi^2 - k1*k4"));
        assert_eq!(s.flows[&sym::eta()], poly("eta^2 + k3*k4"));
        let k3 = &s.flows[&sym::k3()];
        assert_eq!(k3.substitute_unchecked(&s.trace_substitution()), poly("eta*(-2*k1 - 4*k4)"));
    }

    #[test]
    fn product_derivative_is_multiple() {
        let s = sys1();
        let i1 = poly("xi*eta - k1*k3");
        assert_eq!(flow_differentiate(&i1, &s).unwrap(), &poly("eta - xi") * &i1);
        assert_eq!(s.field_derivative(&i1).unwrap(), &poly("eta - xi") * &i1);
    }

    #[test]
    fn trace_is_first_integral() {
        let s = sys1();
        assert!(s.field_derivative(&poly("2*k1 + k3 + 3*k4")).unwrap().is_zero());
        // With e4(k4) kept, the derivative is the trace relation along the flow.
        let d = flow_differentiate(&poly("2*k1 + k3 + 3*k4"), &s).unwrap();
        assert_eq!(d, -s.constraint("trace-flow").unwrap());
    }

    #[test]
    fn closure_certificate_passes() {
        let s = sys1();
        let (checks, cert) = check_closure(&s).unwrap();
        assert!(cert.passed(), "{}", cert.render_text());
        assert!(checks.iter().all(|c| c.in_ideal));
        let p = checks.iter().find(|c| c.id == "product").unwrap();
        assert_eq!(p.cofactor, Some(poly("eta - xi")));
    }

    #[test]
    fn foreign_symbol_rejected() {
        let s = sys1();
        assert!(matches!(flow_differentiate(&poly("w23(e1)"), &s), Err(ElimError::ForeignSymbol(_))));
        assert!(matches!(s.eliminate_jets(&poly("D3 k1")), Err(ElimError::ForeignSymbol(_))));
    }

    #[test]
    fn case2_flow_rules() {
        let (cat, _) = derive_case2().unwrap();
        let s = FlowSystem::case2(&cat).unwrap();
        assert_eq!(s.flows[&sym::kappa()], poly("-2*kappa*tau"));
        assert_eq!(s.flows[&sym::tau()], poly("kappa^2 - tau^2"));
        assert_eq!(s.eliminate_jets(&poly("D4 D4 kappa")).unwrap(), poly("6*kappa*tau^2 - 2*kappa^3"));
    }

    #[test]
    fn homogeneity_weights() {
        let w = |s: &JetSym| if *s == sym::d(&[4], sym::k4()) { 2 } else { 1 };
        assert_eq!(weighted_degree(&poly("D4 k4*xi - k4^3"), w), Some(3));
        assert_eq!(weighted_degree(&poly("D4 k4 - k4"), w), None);
    }
}
