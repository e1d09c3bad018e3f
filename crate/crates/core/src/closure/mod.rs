//! Certified rewrite catalogs.
//!
//! A [`Relation`] is an oriented equation `init·pattern + tail = 0` whose
//! `init` is certified nonzero by the catalog's side conditions. [`reduce`]
//! rewrites a polynomial to normal form:
//!
//! 1. every jet matching a relation pattern (the pattern's word is a suffix
//!    of the jet's word) is replaced; if the jet carries extra outer
//!    directions the relation is prolonged by Leibniz first — for a
//!    non-constant `init` the prolonged relation is
//!    `init²·e_u(P) + init·e_u(tail) − e_u(init)·tail = 0`;
//! 2. constant-`init` replacements are plain substitutions; non-constant ones
//!    are pseudo-substitutions that multiply the polynomial by a power of
//!    `init`, tracked in the returned multiplier;
//! 3. when no relation applies, non-canonical jets are commuted into
//!    canonical order (non-increasing words, `e4` outermost) with explicit
//!    bracket terms.
//!
//! When several patterns match one jet, the longest pattern wins, so an
//! explicit higher-order relation takes precedence over a prolongation.
//! Termination: each rule strictly removes its pattern jet, prolongations
//! only lower the differential order of the replaced part, and commutation
//! terminates on the finite set of words of bounded length; a rewrite budget
//! guards against badly oriented rules.

mod case1;
mod case2;
mod script;

pub use case1::{derive_case1, transversal_vanishing, Case1Derivation};
pub use case2::derive_case2;
pub use script::{Expect, Script};

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, JetSym, Poly, Rat};
use crate::forge::ForgeError;
use crate::frame::{apply_direction, canonicalize, CaseTag, ConnectionTable};

/// Default rewrite budget of [`reduce`].
pub const DEFAULT_BUDGET: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClosureError {
    #[error("rewrite budget of {0} steps exceeded")]
    NonTermination(usize),
    #[error("derivation mismatch at step {step}: expected {expected}, obtained {obtained}")]
    DerivationMismatch { step: String, expected: String, obtained: String },
    #[error("step {step}: normal form is not linear in {symbol}: {poly}")]
    NotLinear { step: String, symbol: String, poly: String },
    #[error("step {step}: leading coefficient {init} is not certified nonzero")]
    InitNotCertified { step: String, init: String },
    #[error("step {step}: branch did not close, residual {residual}")]
    BranchNotClosed { step: String, residual: String },
    #[error("transversal direction must be e2 or e3, got e{0}")]
    NotTransversal(u8),
    #[error(transparent)]
    Forge(#[from] ForgeError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// An oriented relation `init·pattern + tail = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub id: String,
    pub pattern: JetSym,
    pub init: Poly,
    pub tail: Poly,
    /// Side conditions that certify `init ≠ 0`.
    pub side: Vec<Poly>,
    /// The raw constraint the relation was derived from.
    pub source: Poly,
}

impl Relation {
    /// The cleared form `init·pattern + tail`.
    pub fn cleared(&self) -> Poly {
        &(&self.init * &Poly::var(self.pattern.clone())) + &self.tail
    }

    /// The replacement when `init` is a nonzero constant.
    pub fn replacement(&self) -> Option<Poly> {
        let c = self.init.as_constant()?;
        Some(self.tail.scale(&(-c.recip().ok()?)))
    }

    /// Human-readable `pattern = replacement` (a quotient when `init` is
    /// not constant).
    pub fn display(&self) -> String {
        match self.replacement() {
            Some(r) => format!("{} = {}", self.pattern, r),
            None => format!("{} = ({}) / ({})", self.pattern, -&self.tail, self.init),
        }
    }
}

/// An unoriented constraint kept for comparisons and later stages.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedPoly {
    pub id: String,
    pub poly: Poly,
}

/// An ordered rewrite system with its register of side conditions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Catalog {
    pub case: CaseTag,
    #[serde(skip, default = "ConnectionTable::generic")]
    pub table: ConnectionTable,
    pub relations: Vec<Relation>,
    /// Equations that are not used as rewrite rules.
    pub constraints: Vec<NamedPoly>,
    /// Eliminating substitutions applied before comparisons
    /// (e.g. the trace relation solved for `k3`).
    pub algebraic: BTreeMap<JetSym, Poly>,
    /// Side conditions in force (polynomials asserted nonzero).
    pub register: Vec<NamedPoly>,
    pub budget: usize,
}

/// A normal form together with the nonzero multiplier it carries:
/// `multiplier · p ≡ poly` modulo the catalog.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub poly: Poly,
    pub multiplier: Vec<Poly>,
    pub rewrites: usize,
    pub commutations: usize,
}

impl Catalog {
    pub fn new(case: CaseTag) -> Self {
        Catalog {
            case,
            table: ConnectionTable::generic(),
            relations: Vec::new(),
            constraints: Vec::new(),
            algebraic: BTreeMap::new(),
            register: Vec::new(),
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn relation(&self, pattern: &JetSym) -> Option<&Relation> {
        self.relations.iter().find(|r| &r.pattern == pattern)
    }

    pub fn constraint(&self, id: &str) -> Option<&Poly> {
        self.constraints.iter().find(|c| c.id == id).map(|c| &c.poly)
    }

    pub fn assume(&mut self, id: &str, p: Poly) {
        if !self.register.iter().any(|r| r.poly == p) {
            self.register.push(NamedPoly { id: id.to_string(), poly: p });
        }
    }

    /// The catalog restricted to its first `n` relations.
    pub fn truncated(&self, n: usize) -> Catalog {
        let mut c = self.clone();
        c.relations.truncate(n);
        c
    }

    /// Strip every register factor from `p` (after the algebraic
    /// substitutions) and return the primitive part with positive leading
    /// coefficient. Two polynomials with equal normalizations agree up to a
    /// nonzero rational multiple and a product of side conditions.
    pub fn normalize(&self, p: &Poly) -> Poly {
        let mut q = p.substitute_unchecked(&self.algebraic);
        if q.is_zero() {
            return q;
        }
        for r in &self.register {
            let f = r.poly.substitute_unchecked(&self.algebraic).primitive().1;
            if f.is_constant() || f.is_zero() {
                continue;
            }
            q = q.strip_factor(&f).1;
        }
        q.primitive().1
    }

    /// Strip register factors without the algebraic substitutions.
    pub fn strip_side(&self, p: &Poly) -> Poly {
        let mut q = p.clone();
        if q.is_zero() {
            return q;
        }
        for r in &self.register {
            let f = r.poly.primitive().1;
            if f.is_constant() || f.is_zero() {
                continue;
            }
            q = q.strip_factor(&f).1;
        }
        q
    }

    /// Render `p` as `c * f1^e1 * ... * rest` over the register factors.
    pub fn factor_over_register(&self, p: &Poly) -> String {
        if p.is_zero() {
            return "0".into();
        }
        let mut rest = p.clone();
        let mut parts = Vec::new();
        for r in &self.register {
            let f = r.poly.primitive().1;
            if f.is_constant() {
                continue;
            }
            let (e, q) = rest.strip_factor(&f);
            if e > 0 {
                let base = if f.num_terms() > 1 { format!("({f})") } else { f.to_string() };
                parts.push(if e == 1 { base } else { format!("{base}^{e}") });
                rest = q;
            }
        }
        let head = if rest.num_terms() > 1 { format!("({rest})") } else { rest.to_string() };
        std::iter::once(head).chain(parts).collect::<Vec<_>>().join(" * ")
    }

    /// `p` is a nonzero constant times a product of side conditions.
    pub fn certified_nonzero(&self, p: &Poly) -> bool {
        !p.is_zero() && (self.strip_side(p).is_constant() || self.normalize(p).is_constant())
    }

    /// Side conditions that reduce to zero under the catalog (should be none).
    pub fn contradicted_side_conditions(&self) -> Result<Vec<String>, ClosureError> {
        let mut out = Vec::new();
        for r in &self.register {
            let nf = reduce(&r.poly, self)?.poly.substitute_unchecked(&self.algebraic);
            if nf.is_zero() {
                out.push(r.id.clone());
            }
        }
        Ok(out)
    }

    /// Re-verify every relation: its source constraint reduces to zero under
    /// the catalog prefix ending with that relation.
    pub fn reverify(&self) -> Result<Vec<String>, ClosureError> {
        let mut bad = Vec::new();
        for (n, r) in self.relations.iter().enumerate() {
            let nf = reduce(&r.source, &self.truncated(n + 1))?.poly;
            if !nf.substitute_unchecked(&self.algebraic).is_zero() {
                bad.push(r.id.clone());
            }
        }
        Ok(bad)
    }

    /// One line per relation.
    pub fn summary(&self) -> Vec<String> {
        self.relations.iter().map(|r| format!("{}: {}", r.id, r.display())).collect()
    }
}

/// The relation for `jet`, prolonged along the jet's extra outer directions.
fn matching(jet: &JetSym, cat: &Catalog, cache: &mut HashMap<JetSym, Option<(Poly, Poly)>>) -> Option<(Poly, Poly)> {
    if let Some(hit) = cache.get(jet) {
        return hit.clone();
    }
    let best = cat
        .relations
        .iter()
        .filter_map(|r| jet.strip_pattern(&r.pattern).map(|pre| (r, pre)))
        .max_by_key(|(r, _)| r.pattern.order());
    let out = best.map(|(r, prefix)| prolong(&r.init, &r.tail, &prefix));
    cache.insert(jet.clone(), out.clone());
    out
}

/// Prolong `init·P + tail = 0` along the directions of `prefix` (innermost
/// direction last in the word, applied first).
pub fn prolong(init: &Poly, tail: &Poly, prefix: &[u8]) -> (Poly, Poly) {
    let (mut i, mut t) = (init.clone(), tail.clone());
    for &d in prefix.iter().rev() {
        let di = apply_direction(d, &i);
        let dt = apply_direction(d, &t);
        if di.is_zero() {
            t = dt;
        } else {
            t = &(&i * &dt) - &(&di * &t);
            i = &i * &i;
        }
    }
    (i, t)
}

/// Reduce `p` to normal form modulo the catalog.
pub fn reduce(p: &Poly, cat: &Catalog) -> Result<Reduction, ClosureError> {
    let mut cur = p.clone();
    let mut multiplier = Vec::new();
    let mut rewrites = 0usize;
    let mut commutations = 0usize;
    let mut cache = HashMap::new();
    loop {
        if rewrites > cat.budget {
            return Err(ClosureError::NonTermination(cat.budget));
        }
        let syms: BTreeSet<JetSym> = cur.symbols();
        let mut direct = BTreeMap::new();
        let mut pseudo: Option<(JetSym, Poly, Poly)> = None;
        for s in syms.iter().rev() {
            if let Some((init, tail)) = matching(s, cat, &mut cache) {
                if let Some(c) = init.as_constant() {
                    let inv = c.recip()?;
                    direct.insert(s.clone(), tail.scale(&(-inv)));
                } else {
                    let better = match &pseudo {
                        None => true,
                        Some((t, _, _)) => (s.rank(), s) > (t.rank(), t),
                    };
                    if better {
                        pseudo = Some((s.clone(), init, tail));
                    }
                }
            }
        }
        if !direct.is_empty() {
            rewrites += direct.len();
            cur = cur.substitute_unchecked(&direct);
            continue;
        }
        if let Some((s, init, tail)) = pseudo {
            rewrites += 1;
            let d = cur.degree_in(&s);
            let coeffs = cur.coeffs_in(&s);
            let neg_tail = -&tail;
            let mut acc = Poly::zero();
            for (k, c) in coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                acc = &acc + &(&(c * &neg_tail.pow(k as u32)) * &init.pow(d - k as u32));
            }
            for _ in 0..d {
                multiplier.push(init.clone());
            }
            cur = acc;
            continue;
        }
        if syms.iter().any(|s| !s.is_canonical()) {
            let (next, log) = canonicalize(&cur, &cat.table);
            commutations += log.len();
            rewrites += log.len();
            cur = next;
            continue;
        }
        return Ok(Reduction { poly: cur, multiplier, rewrites, commutations });
    }
}

/// Solve a normal form for `symbol`: strip side-condition factors, require
/// degree one in `symbol` and a certified-nonzero leading coefficient.
pub fn orient(nf: &Poly, symbol: &JetSym, cat: &Catalog, step: &str) -> Result<(Poly, Poly), ClosureError> {
    let q = cat.strip_side(nf);
    if q.degree_in(symbol) != 1 {
        return Err(ClosureError::NotLinear { step: step.into(), symbol: symbol.to_string(), poly: q.to_string() });
    }
    let cs = q.coeffs_in(symbol);
    let (init, tail) = (cs[1].clone(), cs[0].clone());
    if tail.mentions(symbol) || !cat.certified_nonzero(&init) {
        return Err(ClosureError::InitNotCertified { step: step.into(), init: init.to_string() });
    }
    // Normalize a constant or leading rational factor to 1.
    let lc = init.leading_coeff();
    let inv = if lc.is_zero() { Rat::one() } else { lc.recip()? };
    Ok((init.scale(&inv), tail.scale(&inv)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{poly, sym};

    fn cat_with(rules: &[(&str, &str)]) -> Catalog {
        let mut c = Catalog::new(CaseTag::CaseI);
        for (pat, rep) in rules {
            let pattern: JetSym = pat.parse().unwrap();
            let tail = -poly(rep);
            c.relations.push(Relation {
                id: pat.to_string(),
                pattern: pattern.clone(),
                init: Poly::one(),
                tail: tail.clone(),
                side: vec![],
                source: &Poly::var(pattern) + &tail,
            });
        }
        c
    }

    #[test]
    fn empty_catalog_is_identity_on_canonical_input() {
        let c = Catalog::new(CaseTag::CaseI);
        let p = poly("D4 D3 k4*xi + k1^2");
        assert_eq!(reduce(&p, &c).unwrap().poly, p);
    }

    #[test]
    fn direct_rule_and_prolongation() {
        let c = cat_with(&[("D4 k1", "xi*(k4 - k1)"), ("D4 xi", "-xi^2 - k1*k4"), ("D4 k4", "0")]);
        let r = reduce(&poly("D4 D4 k1"), &c).unwrap();
        // e4(xi(k4-k1)) = (-xi^2-k1k4)(k4-k1) + xi(0 - xi(k4-k1))
        let expect = poly("(-xi^2 - k1*k4)*(k4 - k1) - xi^2*(k4 - k1)");
        assert_eq!(r.poly, expect);
        assert!(r.multiplier.is_empty());
    }

    #[test]
    fn pseudo_rule_tracks_multiplier() {
        let mut c = Catalog::new(CaseTag::CaseI);
        c.assume("k3-k4", poly("k3 - k4"));
        c.relations.push(Relation {
            id: "r".into(),
            pattern: sym::d(&[3], sym::eta()),
            init: poly("k3 - k4"),
            tail: poly("-k1"),
            side: vec![poly("k3 - k4")],
            source: Poly::zero(),
        });
        let r = reduce(&poly("D3 eta^2 + 1"), &c).unwrap();
        assert_eq!(r.poly, poly("k1^2 + (k3 - k4)^2"));
        assert_eq!(r.multiplier.len(), 2);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let mut c = cat_with(&[("k1", "k3"), ("k3", "k1")]);
        c.budget = 50;
        assert_eq!(reduce(&poly("k1"), &c), Err(ClosureError::NonTermination(50)));
    }

    #[test]
    fn orientation_strips_side_factors() {
        let mut c = Catalog::new(CaseTag::CaseI);
        c.assume("k1-k4", poly("k1 - k4"));
        let (init, tail) = orient(&poly("(k4 - k1)*w14(e4)"), &sym::w(1, 4, 4), &c, "t").unwrap();
        assert_eq!(init, Poly::one());
        assert!(tail.is_zero());
        assert!(matches!(
            orient(&poly("k1*w14(e4) + 1"), &sym::w(1, 4, 4), &c, "t"),
            Err(ClosureError::InitNotCertified { .. })
        ));
        assert!(matches!(orient(&poly("w14(e4)^2"), &sym::w(1, 4, 4), &c, "t"), Err(ClosureError::NotLinear { .. })));
    }
}
