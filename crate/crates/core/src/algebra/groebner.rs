//! Gröbner bases (Buchberger's algorithm, graded reverse-lexicographic
//! order) for exact ideal-membership tests.
//!
//! Polynomials are converted to dense exponent vectors over an explicit
//! variable list; the first variable is the largest. Every polynomial in a
//! basis is kept monic, and the returned basis is reduced, so the remainder
//! of a polynomial is a canonical representative modulo the ideal.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use super::jet::JetSym;
use super::poly::{Monomial, Poly};
use super::rat::Rat;
use super::AlgebraError;

#[derive(Clone, Debug, PartialEq, Eq)]
struct Exp(Vec<u32>);

impl Exp {
    fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn divides(&self, other: &Exp) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    fn sub(&self, other: &Exp) -> Exp {
        Exp(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    fn add(&self, other: &Exp) -> Exp {
        Exp(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn lcm(&self, other: &Exp) -> Exp {
        Exp(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    fn coprime(&self, other: &Exp) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a == 0 || *b == 0)
    }
}

impl Ord for Exp {
    /// Graded reverse lexicographic: higher total degree is larger; on ties
    /// the monomial with the smaller exponent in the last differing
    /// variable is larger.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            for (a, b) in self.0.iter().zip(&other.0).rev() {
                if a != b {
                    return b.cmp(a);
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Exp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq)]
struct DPoly(BTreeMap<Exp, Rat>);

impl DPoly {
    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn lead(&self) -> (&Exp, &Rat) {
        self.0.iter().next_back().expect("nonzero polynomial")
    }

    fn monic(mut self) -> DPoly {
        if let Some((_, c)) = self.0.iter().next_back() {
            let inv = c.recip().expect("nonzero leading coefficient");
            for v in self.0.values_mut() {
                *v = &*v * &inv;
            }
        }
        self
    }

    /// `self − c·x^shift·g`.
    fn sub_multiple(&mut self, c: &Rat, shift: &Exp, g: &DPoly) {
        for (e, v) in &g.0 {
            let k = e.add(shift);
            let nv = match self.0.get(&k) {
                Some(old) => old - &(c * v),
                None => -(c * v),
            };
            if nv.is_zero() {
                self.0.remove(&k);
            } else {
                self.0.insert(k, nv);
            }
        }
    }
}

/// Full reduction of `p` by `basis` (all terms, not only the leading one).
fn remainder(p: &DPoly, basis: &[DPoly]) -> DPoly {
    let mut work = p.clone();
    let mut rem = DPoly(BTreeMap::new());
    while let Some((e, c)) = work.0.iter().next_back().map(|(e, c)| (e.clone(), c.clone())) {
        match basis.iter().find(|g| g.lead().0.divides(&e)) {
            Some(g) => {
                let (ge, gc) = g.lead();
                let f = c.checked_div(gc).expect("nonzero leading coefficient");
                work.sub_multiple(&f, &e.sub(ge), g);
            }
            None => {
                work.0.remove(&e);
                rem.0.insert(e, c);
            }
        }
    }
    rem
}

fn s_poly(f: &DPoly, g: &DPoly) -> DPoly {
    let (fe, fc) = f.lead();
    let (ge, gc) = g.lead();
    let l = fe.lcm(ge);
    let mut s = DPoly(BTreeMap::new());
    s.sub_multiple(&-fc.recip().expect("nonzero"), &l.sub(fe), f);
    s.sub_multiple(&gc.recip().expect("nonzero"), &l.sub(ge), g);
    s
}

/// A reduced Gröbner basis of an ideal of `ℚ[vars]`.
#[derive(Clone, Debug)]
pub struct GroebnerBasis {
    vars: Vec<JetSym>,
    basis: Vec<DPoly>,
}

impl GroebnerBasis {
    /// Computes a reduced basis of the ideal generated by `gens`. Every
    /// generator must mention only symbols from `vars`.
    pub fn new(gens: &[Poly], vars: &[JetSym]) -> Result<Self, AlgebraError> {
        let mut basis: Vec<DPoly> = Vec::new();
        for g in gens {
            let d = to_dense(g, vars)?;
            if !d.is_zero() {
                basis.push(d.monic());
            }
        }
        let mut pairs: Vec<(usize, usize)> =
            (0..basis.len()).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
        while !pairs.is_empty() {
            // Normal strategy: the pair with the smallest lcm first.
            let pos = (0..pairs.len())
                .min_by(|&x, &y| {
                    let lx = basis[pairs[x].0].lead().0.lcm(basis[pairs[x].1].lead().0);
                    let ly = basis[pairs[y].0].lead().0.lcm(basis[pairs[y].1].lead().0);
                    lx.cmp(&ly)
                })
                .expect("nonempty");
            let (i, j) = pairs.swap_remove(pos);
            let (ei, ej) = (basis[i].lead().0.clone(), basis[j].lead().0.clone());
            if ei.coprime(&ej) {
                continue;
            }
            // Chain criterion: skip if some third leading monomial divides the
            // lcm and both of its pairs with i and j are already handled.
            let l = ei.lcm(&ej);
            let pending = |a: usize, b: usize| pairs.contains(&(a.min(b), a.max(b)));
            if (0..basis.len()).any(|k| {
                k != i && k != j && basis[k].lead().0.divides(&l) && !pending(i, k) && !pending(j, k)
            }) {
                continue;
            }
            let r = remainder(&s_poly(&basis[i], &basis[j]), &basis);
            if !r.is_zero() {
                let n = basis.len();
                basis.push(r.monic());
                pairs.extend((0..n).map(|k| (k, n)));
            }
        }
        // Reduce: drop redundant leading monomials, then inter-reduce tails.
        let mut minimal: Vec<DPoly> = Vec::new();
        for (k, g) in basis.iter().enumerate() {
            let e = g.lead().0;
            let redundant = basis.iter().enumerate().any(|(m, h)| {
                m != k && h.lead().0.divides(e) && (h.lead().0 != e || m < k)
            });
            if !redundant {
                minimal.push(g.clone());
            }
        }
        let mut reduced = Vec::with_capacity(minimal.len());
        for k in 0..minimal.len() {
            let others: Vec<DPoly> =
                minimal.iter().enumerate().filter(|(m, _)| *m != k).map(|(_, g)| g.clone()).collect();
            let g = &minimal[k];
            let (le, lc) = (g.lead().0.clone(), g.lead().1.clone());
            let mut tail = g.clone();
            tail.0.remove(&le);
            let mut r = remainder(&tail, &others);
            r.0.insert(le, lc);
            reduced.push(r.monic());
        }
        reduced.sort_by(|a, b| a.lead().0.cmp(b.lead().0));
        Ok(GroebnerBasis { vars: vars.to_vec(), basis: reduced })
    }

    /// Canonical remainder of `p` modulo the ideal.
    pub fn reduce(&self, p: &Poly) -> Result<Poly, AlgebraError> {
        Ok(from_dense(&remainder(&to_dense(p, &self.vars)?, &self.basis), &self.vars))
    }

    /// Ideal membership.
    pub fn contains(&self, p: &Poly) -> Result<bool, AlgebraError> {
        Ok(self.reduce(p)?.is_zero())
    }

    /// True when the ideal is the whole ring (the system has no solutions
    /// over any field extension).
    pub fn is_unit(&self) -> bool {
        self.basis.iter().any(|g| g.lead().0.degree() == 0)
    }

    /// Basis elements as polynomials.
    pub fn polys(&self) -> Vec<Poly> {
        self.basis.iter().map(|g| from_dense(g, &self.vars)).collect()
    }
}

fn to_dense(p: &Poly, vars: &[JetSym]) -> Result<DPoly, AlgebraError> {
    let mut out = BTreeMap::new();
    for (m, c) in p.terms() {
        let mut e = vec![0u32; vars.len()];
        for (s, k) in m.factors() {
            let idx = vars
                .iter()
                .position(|v| v == s)
                .ok_or_else(|| AlgebraError::Parse(format!("symbol {s} outside the variable list")))?;
            e[idx] = *k;
        }
        out.insert(Exp(e), c.clone());
    }
    Ok(DPoly(out))
}

fn from_dense(d: &DPoly, vars: &[JetSym]) -> Poly {
    Poly::from_terms(d.0.iter().map(|(e, c)| {
        (Monomial::from_factors(vars.iter().cloned().zip(e.0.iter().copied())), c.clone())
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly;

    fn vars(names: &[char]) -> Vec<JetSym> {
        names.iter().map(|&c| JetSym::var(c)).collect()
    }

    #[test]
    fn twisted_cubic_membership() {
        // Ideal of the twisted cubic (t, t^2, t^3) in x, y, z.
        let v = vars(&['x', 'y', 'z']);
        let g = GroebnerBasis::new(&[poly("y - x^2"), poly("z - x^3")], &v).unwrap();
        assert!(g.contains(&poly("x*z - y^2")).unwrap());
        assert!(g.contains(&poly("y*z - x^5")).unwrap());
        assert!(!g.contains(&poly("x*y - z + 1")).unwrap());
        assert!(!g.is_unit());
    }

    #[test]
    fn inconsistent_system_is_unit() {
        let v = vars(&['x', 'y']);
        let g = GroebnerBasis::new(&[poly("x*y - 1"), poly("x")], &v).unwrap();
        assert!(g.is_unit());
        assert_eq!(g.reduce(&poly("x^3 + y + 7")).unwrap(), Poly::zero());
    }

    #[test]
    fn remainder_is_canonical() {
        let v = vars(&['x', 'y']);
        let g = GroebnerBasis::new(&[poly("x^2 - y"), poly("x*y - 1")], &v).unwrap();
        // x^3 = x·x^2 = x·y = 1, so x^3 and 1 share a normal form.
        assert_eq!(g.reduce(&poly("x^3")).unwrap(), g.reduce(&Poly::one()).unwrap());
        assert!(g.contains(&poly("y^3 - 1")).unwrap());
    }

    #[test]
    fn foreign_symbol_rejected() {
        let v = vars(&['x']);
        assert!(GroebnerBasis::new(&[poly("x - y")], &v).is_err());
    }
}
