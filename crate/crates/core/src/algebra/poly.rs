//! Sparse multivariate polynomials over `Rat` in jet symbols.
//!
//! Monomials are ordered graded-lexicographically: total degree first, then
//! lexicographically on exponent vectors with variables enumerated by the
//! `Ord` of [`JetSym`] (smallest symbol = most significant variable). The
//! polynomial map is keyed by that order, and text output lists terms from
//! the leading (largest) monomial down to the constant term.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::jet::JetSym;
use super::rat::Rat;
use super::AlgebraError;

/// A power product of jet symbols; exponents are strictly positive and the
/// factors are sorted by symbol.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    factors: Vec<(JetSym, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial { factors: Vec::new() }
    }

    pub fn var(s: JetSym) -> Self {
        Monomial { factors: vec![(s, 1)] }
    }

    /// Builds a monomial from arbitrary factors, merging repeats and
    /// dropping zero exponents.
    pub fn from_factors<I: IntoIterator<Item = (JetSym, u32)>>(it: I) -> Self {
        let mut map: BTreeMap<JetSym, u32> = BTreeMap::new();
        for (s, e) in it {
            if e > 0 {
                *map.entry(s).or_insert(0) += e;
            }
        }
        Monomial { factors: map.into_iter().collect() }
    }

    pub fn factors(&self) -> &[(JetSym, u32)] {
        &self.factors
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|(_, e)| e).sum()
    }

    pub fn degree_in(&self, s: &JetSym) -> u32 {
        match self.factors.binary_search_by(|(x, _)| x.cmp(s)) {
            Ok(i) => self.factors[i].1,
            Err(_) => 0,
        }
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.factors, &other.factors);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0.clone(), a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial { factors: out }
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.factors.len());
        let mut j = 0;
        for (s, e) in &self.factors {
            if j < other.factors.len() && other.factors[j].0 == *s {
                let f = other.factors[j].1;
                if f > *e {
                    return None;
                }
                if f < *e {
                    out.push((s.clone(), e - f));
                }
                j += 1;
            } else if j < other.factors.len() && other.factors[j].0 < *s {
                return None;
            } else {
                out.push((s.clone(), *e));
            }
        }
        if j < other.factors.len() {
            return None;
        }
        Some(Monomial { factors: out })
    }

    /// The monomial with symbol `s` removed, and the removed exponent.
    pub fn split_off(&self, s: &JetSym) -> (Monomial, u32) {
        let mut e = 0;
        let factors = self
            .factors
            .iter()
            .filter(|(x, k)| {
                if x == s {
                    e = *k;
                    false
                } else {
                    true
                }
            })
            .cloned()
            .collect();
        (Monomial { factors }, e)
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::new();
        for (s, e) in &self.factors {
            let f = other.degree_in(s);
            if f > 0 {
                out.push((s.clone(), (*e).min(f)));
            }
        }
        Monomial { factors: out }
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let d = self.degree().cmp(&other.degree());
        if d != Ordering::Equal {
            return d;
        }
        let (a, b) = (&self.factors, &other.factors);
        let mut i = 0;
        while i < a.len() && i < b.len() {
            match a[i].0.cmp(&b[i].0) {
                // `a` contains a more significant variable that `b` lacks.
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => {
                    let c = a[i].1.cmp(&b[i].1);
                    if c != Ordering::Equal {
                        return c;
                    }
                }
            }
            i += 1;
        }
        a.len().cmp(&b.len())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        for (n, (s, e)) in self.factors.iter().enumerate() {
            if n > 0 {
                write!(f, "*")?;
            }
            if *e == 1 {
                write!(f, "{s}")?;
            } else {
                write!(f, "{s}^{e}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A polynomial: canonical map from monomials to nonzero rationals.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rat>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Poly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::one(), c);
        }
        p
    }

    pub fn int(n: i64) -> Self {
        Poly::constant(Rat::from_int(n))
    }

    pub fn var(s: JetSym) -> Self {
        Poly::term(Rat::one(), Monomial::var(s))
    }

    pub fn term(c: Rat, m: Monomial) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rat)>>(it: I) -> Self {
        let mut p = Poly::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    /// Adds `c·m` in place, keeping the map canonical.
    pub fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_one())
    }

    /// The constant value if the polynomial has no symbols.
    pub fn as_constant(&self) -> Option<Rat> {
        if self.is_zero() {
            Some(Rat::zero())
        } else if self.is_constant() {
            self.terms.values().next().cloned()
        } else {
            None
        }
    }

    pub fn constant_term(&self) -> Rat {
        self.terms.get(&Monomial::one()).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn coeff(&self, m: &Monomial) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    /// Leading term under the graded-lexicographic order.
    pub fn leading(&self) -> Option<(&Monomial, &Rat)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> Rat {
        self.leading().map(|(_, c)| c.clone()).unwrap_or_else(Rat::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn symbols(&self) -> BTreeSet<JetSym> {
        let mut out = BTreeSet::new();
        for m in self.terms.keys() {
            for (s, _) in m.factors() {
                out.insert(s.clone());
            }
        }
        out
    }

    pub fn mentions(&self, s: &JetSym) -> bool {
        self.terms.keys().any(|m| m.degree_in(s) > 0)
    }

    pub fn degree_in(&self, s: &JetSym) -> u32 {
        self.terms.keys().map(|m| m.degree_in(s)).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect() }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(n, k)| (n.mul(m), k * c)).collect() }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Coefficients in `s`: `p = Σ c_k s^k`, returned indexed by `k`.
    pub fn coeffs_in(&self, s: &JetSym) -> Vec<Poly> {
        let d = self.degree_in(s) as usize;
        let mut out = vec![Poly::zero(); d + 1];
        for (m, c) in &self.terms {
            let (rest, e) = m.split_off(s);
            out[e as usize].add_term(rest, c.clone());
        }
        out
    }

    /// Inverse of [`Poly::coeffs_in`].
    pub fn from_coeffs_in(s: &JetSym, coeffs: &[Poly]) -> Poly {
        let mut out = Poly::zero();
        for (k, c) in coeffs.iter().enumerate() {
            let sk = Monomial::from_factors([(s.clone(), k as u32)]);
            for (m, v) in &c.terms {
                out.add_term(m.mul(&sk), v.clone());
            }
        }
        out
    }

    /// Formal partial derivative with respect to one symbol.
    pub fn diff(&self, s: &JetSym) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let (rest, e) = m.split_off(s);
            if e > 0 {
                let m2 = rest.mul(&Monomial::from_factors([(s.clone(), e - 1)]));
                out.add_term(m2, c * &Rat::from_int(e as i64));
            }
        }
        out
    }

    /// Simultaneous substitution of symbols by polynomials.
    ///
    /// Fails with `CyclicBinding` when a symbol's image mentions the symbol
    /// itself.
    pub fn substitute(&self, bindings: &BTreeMap<JetSym, Poly>) -> Result<Poly, AlgebraError> {
        for (s, img) in bindings {
            if img.mentions(s) {
                return Err(AlgebraError::CyclicBinding(s.to_string()));
            }
        }
        Ok(self.substitute_unchecked(bindings))
    }

    /// Substitution without the acyclicity check (used where bindings are
    /// identities between distinct jets, e.g. rewrite rules).
    pub fn substitute_unchecked(&self, bindings: &BTreeMap<JetSym, Poly>) -> Poly {
        if bindings.is_empty() {
            return self.clone();
        }
        let mut powers: BTreeMap<(JetSym, u32), Poly> = BTreeMap::new();
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut kept = Vec::new();
            let mut image = Poly::constant(c.clone());
            for (s, e) in m.factors() {
                match bindings.get(s) {
                    Some(p) => {
                        let pw = powers
                            .entry((s.clone(), *e))
                            .or_insert_with(|| p.pow(*e))
                            .clone();
                        image = &image * &pw;
                    }
                    None => kept.push((s.clone(), *e)),
                }
            }
            let km = Monomial::from_factors(kept);
            for (m2, c2) in image.terms {
                out.add_term(m2.mul(&km), c2);
            }
        }
        out
    }

    pub fn substitute_one(&self, s: &JetSym, img: &Poly) -> Poly {
        let mut b = BTreeMap::new();
        b.insert(s.clone(), img.clone());
        self.substitute_unchecked(&b)
    }

    /// Exact evaluation of a polynomial in at most one symbol.
    pub fn eval_rational(&self, x0: &Rat) -> Result<Rat, AlgebraError> {
        let syms = self.symbols();
        if syms.len() > 1 {
            return Err(AlgebraError::NotUnivariate(syms.len()));
        }
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            acc += &(c * &x0.pow(m.degree()));
        }
        Ok(acc)
    }

    /// Floating-point evaluation with a symbol assignment.
    pub fn eval_f64<F: Fn(&JetSym) -> f64>(&self, assign: F) -> f64 {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_f64();
            for (s, e) in m.factors() {
                t *= assign(s).powi(*e as i32);
            }
            acc += t;
        }
        acc
    }

    /// Exact quotient `self / d` if `d` divides `self` in ℚ[symbols].
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (dm, dc) = d.leading()?;
        let (dm, dc) = (dm.clone(), dc.clone());
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&c.recip().ok()?));
        }
        let mut r = self.clone();
        let mut q = Poly::zero();
        while let Some((rm, rc)) = r.leading() {
            let qm = rm.div(&dm)?;
            let qc = rc / &dc;
            r = &r - &d.mul_monomial(&qm, &qc);
            q.add_term(qm, qc);
        }
        Some(q)
    }

    /// Splits off the rational content: returns `(c, p)` with `self = c·p`,
    /// `p` having coprime integer coefficients and positive leading
    /// coefficient.
    pub fn primitive(&self) -> (Rat, Poly) {
        if self.is_zero() {
            return (Rat::one(), Poly::zero());
        }
        let mut c = Rat::content_of(self.terms.values());
        if self.leading_coeff().is_negative() {
            c = -c;
        }
        let inv = c.recip().expect("content is nonzero");
        (c, self.scale(&inv))
    }

    /// Divides out every power of the symbol `s` that divides all terms;
    /// returns the stripped exponent.
    pub fn strip_symbol_power(&self, s: &JetSym) -> (u32, Poly) {
        let e = self.terms.keys().map(|m| m.degree_in(s)).min().unwrap_or(0);
        if e == 0 {
            return (0, self.clone());
        }
        let div = Monomial::from_factors([(s.clone(), e)]);
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (m.div(&div).expect("common power"), c.clone()))
            .collect();
        (e, Poly { terms })
    }

    /// Divides `self` by `f` as many times as exactly possible; returns the
    /// multiplicity and the cofactor.
    pub fn strip_factor(&self, f: &Poly) -> (u32, Poly) {
        if f.is_constant() || self.is_zero() {
            return (0, self.clone());
        }
        let mut cur = self.clone();
        let mut n = 0;
        while let Some(q) = cur.div_exact(f) {
            cur = q;
            n += 1;
        }
        (n, cur)
    }

    /// Text form, parseable by [`Poly::parse`].
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn parse(s: &str) -> Result<Poly, AlgebraError> {
        super::parse::parse_poly(s)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            match (n, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if m.is_one() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{a}*{m}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Poly::parse(&s).map_err(serde::de::Error::custom)
    }
}

impl std::str::FromStr for Poly {
    type Err = AlgebraError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Poly::parse(s)
    }
}

impl From<JetSym> for Poly {
    fn from(s: JetSym) -> Self {
        Poly::var(s)
    }
}

impl From<Rat> for Poly {
    fn from(c: Rat) -> Self {
        Poly::constant(c)
    }
}

impl From<i64> for Poly {
    fn from(n: i64) -> Self {
        Poly::int(n)
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let (big, small) = if self.terms.len() >= rhs.terms.len() { (self, rhs) } else { (rhs, self) };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
}

macro_rules! owned_ops {
    ($tr:ident, $method:ident) => {
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: &Poly) -> Poly {
                (&self).$method(rhs)
            }
        }
        impl $tr<Poly> for &Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly {
                self.$method(&rhs)
            }
        }
    };
}

owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::jet::sym;

    fn p(s: &str) -> Poly {
        Poly::parse(s).unwrap()
    }

    #[test]
    fn trivial_arithmetic() {
        assert!((p("x^2 - 1") + p("1 - x^2")).is_zero());
        assert_eq!(p("x - a") * p("x + a"), p("x^2 - a^2"));
        assert_eq!(p("xi + eta").pow(2), p("xi^2 + 2*xi*eta + eta^2"));
        assert_eq!(p("xi").pow(0), Poly::one());
    }

    #[test]
    fn grlex_order_prints_leading_first() {
        assert_eq!(p("1 + a + a^2").to_string(), "a^2 + a + 1");
        assert_eq!(p("k4 + k1*k4 + k1").to_string(), "k1*k4 + k1 + k4");
        assert_eq!(p("-3/2*xi + 2").to_string(), "-3/2*xi + 2");
    }

    #[test]
    fn substitution_examples() {
        let mut b = BTreeMap::new();
        b.insert(sym::k1(), p("a*k4"));
        b.insert(sym::k3(), p("(-2*a - 3)*k4"));
        let got = p("xi*eta - k1*k3").substitute(&b).unwrap();
        assert_eq!(got, p("xi*eta - a*(-2*a-3)*k4^2"));
        assert_eq!(p("xi").substitute(&BTreeMap::new()).unwrap(), p("xi"));
        let mut z = BTreeMap::new();
        z.insert(sym::kappa(), Poly::zero());
        assert!(p("kappa^3").substitute(&z).unwrap().is_zero());
        let mut cyc = BTreeMap::new();
        cyc.insert(sym::xi(), p("xi + 1"));
        assert!(matches!(p("xi").substitute(&cyc), Err(AlgebraError::CyclicBinding(_))));
    }

    #[test]
    fn exact_division() {
        let f = p("k1 - k3");
        let g = p("xi*eta + k4");
        assert_eq!((&f * &g).div_exact(&f), Some(g.clone()));
        assert_eq!((&f * &g + Poly::one()).div_exact(&f), None);
        let (n, rest) = (&f.pow(3) * &g).strip_factor(&f);
        assert_eq!((n, rest), (3, g));
    }

    #[test]
    fn evaluation() {
        assert_eq!(p("x^2 - 2").eval_rational(&Rat::one()).unwrap(), Rat::from_int(-1));
        assert!(p("x*y").eval_rational(&Rat::one()).is_err());
    }

    #[test]
    fn primitive_part_is_integral_with_positive_lead() {
        let (c, q) = p("-3/2*a^2 + 9/4").primitive();
        assert_eq!(c, Rat::frac(-3, 4));
        assert_eq!(q, p("2*a^2 - 3"));
    }

    #[test]
    fn coefficient_split_round_trips() {
        let f = p("xi^2*eta + 3*xi*k1 - k4");
        let cs = f.coeffs_in(&sym::xi());
        assert_eq!(cs.len(), 3);
        assert_eq!(Poly::from_coeffs_in(&sym::xi(), &cs), f);
    }
}
