//! A derivation script: a catalog under construction plus the certificate
//! that records each step.

use super::{orient, reduce, Catalog, ClosureError, NamedPoly, Reduction, Relation};
use crate::algebra::{JetSym, Poly};
use crate::certificate::{Certificate, Step, Verdict};
use crate::frame::CaseTag;

/// What a step's normal form is compared against.
#[derive(Clone, Debug)]
pub enum Expect<'a> {
    /// No independent expectation; the result is recorded as derived.
    Nothing,
    /// Must agree (up to side conditions and a rational factor); a
    /// disagreement aborts the derivation with `DerivationMismatch`.
    Exact(&'a str),
    /// A published display: a disagreement is recorded as a diff and the
    /// derivation continues with the obtained form.
    Published(&'a str),
}

pub struct Script {
    pub cat: Catalog,
    pub cert: Certificate,
}

impl Script {
    pub fn new(name: &str, case: CaseTag) -> Self {
        Script { cat: Catalog::new(case), cert: Certificate::new(name, Some(case)) }
    }

    pub fn reduce(&self, p: &Poly) -> Result<Reduction, ClosureError> {
        reduce(p, &self.cat)
    }

    /// Compare a normal form against an expected polynomial (itself reduced
    /// by the current catalog) up to side conditions and rational factors.
    pub fn agrees(&self, nf: &Poly, expected: &Poly) -> Result<bool, ClosureError> {
        let e = reduce(expected, &self.cat)?.poly;
        Ok(self.cat.normalize(nf) == self.cat.normalize(&e))
    }

    fn multiplier_ok(&self, r: &Reduction) -> bool {
        r.multiplier.iter().all(|m| self.cat.certified_nonzero(m))
    }

    /// Record a comparison step and decide its verdict.
    fn judge(&mut self, step: Step, nf: &Poly, expect: &Expect<'_>, fallback: Verdict) -> Result<Verdict, ClosureError> {
        let id = step.id.clone();
        let (step, verdict) = match expect {
            Expect::Nothing => (step, fallback),
            Expect::Exact(e) | Expect::Published(e) => {
                let ok = self.agrees(nf, &crate::algebra::poly(e))?;
                let v = match (ok, expect) {
                    (true, _) => Verdict::Certified,
                    (false, Expect::Published(_)) => Verdict::Diff,
                    _ => Verdict::Failed,
                };
                (step.expected(e), v)
            }
        };
        self.cert.push(step.verdict(verdict));
        if verdict == Verdict::Failed {
            let exp = match expect {
                Expect::Exact(e) | Expect::Published(e) => e.to_string(),
                Expect::Nothing => String::new(),
            };
            return Err(ClosureError::DerivationMismatch { step: id, expected: exp, obtained: nf.to_string() });
        }
        Ok(verdict)
    }

    /// Reduce `raw`, compare with `expect`, then orient for `solve_for` and
    /// append the relation.
    pub fn rule(
        &mut self,
        id: &str,
        operation: &str,
        raw: &Poly,
        solve_for: &JetSym,
        expect: Expect<'_>,
    ) -> Result<Relation, ClosureError> {
        let red = self.reduce(raw)?;
        if !self.multiplier_ok(&red) {
            return Err(ClosureError::InitNotCertified { step: id.into(), init: format!("{:?}", red.multiplier) });
        }
        let (init, tail) = orient(&red.poly, solve_for, &self.cat, id)?;
        let rel = Relation {
            id: id.to_string(),
            pattern: solve_for.clone(),
            init: init.clone(),
            tail,
            side: self.cat.register.iter().map(|r| r.poly.clone()).filter(|s| init.div_exact(s).is_some()).collect(),
            source: raw.clone(),
        };
        let step = Step::new(id, operation)
            .input("constraint", raw)
            .input("solve-for", solve_for)
            .obtained(rel.display())
            .note(format!("normal form: {}", red.poly));
        let verdict = self.judge(step, &red.poly, &expect, Verdict::Derived)?;
        let _ = verdict;
        self.cat.relations.push(rel.clone());
        Ok(rel)
    }

    /// Introduce a named symbol for a connection coefficient.
    pub fn alias(&mut self, id: &str, from: &JetSym, to: &JetSym) {
        let rel = Relation {
            id: id.to_string(),
            pattern: from.clone(),
            init: Poly::one(),
            tail: -Poly::var(to.clone()),
            side: vec![],
            source: &Poly::var(from.clone()) - &Poly::var(to.clone()),
        };
        self.cert.push(
            Step::new(id, "define")
                .input("symbol", from)
                .obtained(rel.display())
                .verdict(Verdict::Derived),
        );
        self.cat.relations.push(rel);
    }

    /// Install an explicit rule `pattern → replacement` certified by the
    /// fact that `witness` (an independent computation of the pattern)
    /// reduces to the replacement under the current catalog.
    pub fn certified_rule(
        &mut self,
        id: &str,
        operation: &str,
        pattern: &JetSym,
        witness: &Poly,
        replacement: &Poly,
    ) -> Result<Relation, ClosureError> {
        let red = self.reduce(witness)?;
        let diff = self.cat.normalize(&(&red.poly - &reduce(replacement, &self.cat)?.poly));
        let ok = diff.is_zero() && red.multiplier.is_empty();
        let rel = Relation {
            id: id.to_string(),
            pattern: pattern.clone(),
            init: Poly::one(),
            tail: -replacement,
            side: vec![],
            source: &Poly::var(pattern.clone()) - witness,
        };
        self.cert.push(
            Step::new(id, operation)
                .input("witness", witness)
                .expected(replacement)
                .obtained(&red.poly)
                .check(ok),
        );
        if !ok {
            return Err(ClosureError::DerivationMismatch {
                step: id.into(),
                expected: replacement.to_string(),
                obtained: red.poly.to_string(),
            });
        }
        self.cat.relations.push(rel.clone());
        Ok(rel)
    }

    /// A constraint expected to reduce to zero (a duplicate or vacuous
    /// instance).
    pub fn vacuous(&mut self, id: &str, operation: &str, raw: &Poly) -> Result<(), ClosureError> {
        let red = self.reduce(raw)?;
        let nf = red.poly.substitute_unchecked(&self.cat.algebraic);
        let step = Step::new(id, operation).input("constraint", raw).expected("0").obtained(&nf);
        if nf.is_zero() {
            self.cert.push(step.verdict(Verdict::Vacuous));
            Ok(())
        } else {
            self.cert.push(step.verdict(Verdict::Failed));
            Err(ClosureError::DerivationMismatch { step: id.into(), expected: "0".into(), obtained: nf.to_string() })
        }
    }

    /// Check that a displayed relation (cleared form) follows from the
    /// catalog: it must reduce to zero.
    pub fn confirm(&mut self, id: &str, display: &str, cleared: &str) -> Result<(), ClosureError> {
        let p = crate::algebra::poly(cleared);
        let red = self.reduce(&p)?;
        let nf = red.poly.substitute_unchecked(&self.cat.algebraic);
        let ok = nf.is_zero();
        self.cert.push(
            Step::new(id, "confirm")
                .input("relation", display)
                .input("cleared", &p)
                .expected("0")
                .obtained(&nf)
                .check(ok),
        );
        if ok {
            Ok(())
        } else {
            Err(ClosureError::DerivationMismatch { step: id.into(), expected: display.into(), obtained: nf.to_string() })
        }
    }

    /// Reduce a constraint and keep it unoriented.
    pub fn constraint(&mut self, id: &str, operation: &str, raw: &Poly, expect: Expect<'_>) -> Result<Poly, ClosureError> {
        let red = self.reduce(raw)?;
        let nf = self.cat.strip_side(&red.poly).primitive().1;
        let step = Step::new(id, operation).input("constraint", raw).obtained(&nf);
        self.judge(step, &nf, &expect, Verdict::Derived)?;
        self.cat.constraints.push(NamedPoly { id: id.to_string(), poly: nf.clone() });
        Ok(nf)
    }

    /// Record a free-form note step.
    pub fn note(&mut self, id: &str, operation: &str, obtained: impl std::fmt::Display, note: &str) {
        self.cert.push(Step::new(id, operation).obtained(obtained).verdict(Verdict::Derived).note(note));
    }
}
