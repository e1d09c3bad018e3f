//! Directional derivatives of polynomials in jet symbols, explicit bracket
//! commutation of derivative words, covariant derivatives and the Laplacian.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{bracket, ConnectionTable, TangentExpr};
use crate::algebra::{JetSym, Monomial, Poly, Rat};

/// `e_i(p)`: the derivation that is ℚ-linear, obeys Leibniz, and prepends
/// `i` to the derivative word of every jet.
pub fn apply_direction(i: u8, p: &Poly) -> Poly {
    let mut out = Poly::zero();
    for (m, c) in p.terms() {
        let factors = m.factors();
        for (k, (s, e)) in factors.iter().enumerate() {
            let mut f: Vec<(JetSym, u32)> = Vec::with_capacity(factors.len() + 1);
            for (l, (t, g)) in factors.iter().enumerate() {
                if l == k {
                    if *e > 1 {
                        f.push((t.clone(), e - 1));
                    }
                } else {
                    f.push((t.clone(), *g));
                }
            }
            f.push((s.prepend(i), 1));
            out.add_term(Monomial::from_factors(f), c * &Rat::from_int(*e as i64));
        }
    }
    out
}

/// Applies a derivative word (leftmost applied last).
pub fn apply_word(word: &[u8], p: &Poly) -> Poly {
    let mut out = p.clone();
    for &i in word.iter().rev() {
        out = apply_direction(i, &out);
    }
    out
}

/// `V(p)` for a tangent expression `V = Σ v_m e_m`.
pub fn apply_vector(v: &TangentExpr, p: &Poly) -> Poly {
    let mut out = Poly::zero();
    for m in 1..=4 {
        let c = v.get(m);
        if !c.is_zero() {
            out = &out + &(c * &apply_direction(m, p));
        }
    }
    out
}

/// `∇_{e_i} V = Σ_m (e_i(v_m) e_m + v_m ∇_{e_i} e_m)`.
pub fn covariant(i: u8, v: &TangentExpr, table: &ConnectionTable) -> TangentExpr {
    let mut out = TangentExpr::zero();
    for m in 1..=4 {
        let c = v.get(m);
        if c.is_zero() {
            continue;
        }
        let mut d = TangentExpr::basis(m).scale(&apply_direction(i, c));
        d = &d + &table.nabla(i, m).scale(c);
        out = &out + &d;
    }
    out
}

/// `∇_V e_k = Σ_p v_p ∇_{e_p} e_k`.
pub fn nabla_along(v: &TangentExpr, k: u8, table: &ConnectionTable) -> TangentExpr {
    let mut out = TangentExpr::zero();
    for p in 1..=4 {
        let c = v.get(p);
        if !c.is_zero() {
            out = &out + &table.nabla(p, k).scale(c);
        }
    }
    out
}

/// One logged commutation `e_i e_j f → e_j e_i f + [e_i, e_j] f` applied
/// inside a jet.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Commutation {
    pub jet: String,
    pub swapped: (u8, u8),
    pub position: usize,
}

/// Rewrites the jet `D_prefix D_i D_j D_rest f` (swap at `pos`) into
/// `D_prefix D_j D_i D_rest f + D_prefix([e_i, e_j](D_rest f))`.
fn commuted_image(jet: &JetSym, pos: usize, table: &ConnectionTable) -> Poly {
    let w = &jet.word;
    let (i, j) = (w[pos], w[pos + 1]);
    let mut swapped = w.clone();
    swapped.swap(pos, pos + 1);
    let swapped = Poly::var(JetSym::with_word(jet.base, swapped));
    let inner = Poly::var(JetSym::with_word(jet.base, w[pos + 2..].to_vec()));
    let br = bracket(i, j, table).expect("distinct indices");
    let corr = apply_word(&w[..pos], &apply_vector(&br, &inner));
    &swapped + &corr
}

/// Applies `e_i e_j f = e_j e_i f + [e_i, e_j] f` to every jet of `p` whose
/// word contains the adjacent pair `(i, j)` (first occurrence).
pub fn commute_jets(p: &Poly, i: u8, j: u8, table: &ConnectionTable) -> Poly {
    if i == j {
        return p.clone();
    }
    let mut bindings = BTreeMap::new();
    for s in p.symbols() {
        if let Some(pos) = s.word.windows(2).position(|w| w[0] == i && w[1] == j) {
            let img = commuted_image(&s, pos, table);
            bindings.insert(s, img);
        }
    }
    p.substitute_unchecked(&bindings)
}

/// Brings every jet into canonical order (words non-increasing left to
/// right) by repeated explicit commutation, logging each swap.
pub fn canonicalize(p: &Poly, table: &ConnectionTable) -> (Poly, Vec<Commutation>) {
    let mut cur = p.clone();
    let mut log = Vec::new();
    loop {
        let mut bindings = BTreeMap::new();
        for s in cur.symbols() {
            if let Some(pos) = s.word.windows(2).position(|w| w[0] < w[1]) {
                log.push(Commutation { jet: s.to_string(), swapped: (s.word[pos], s.word[pos + 1]), position: pos });
                let img = commuted_image(&s, pos, table);
                bindings.insert(s, img);
            }
        }
        if bindings.is_empty() {
            return (cur, log);
        }
        cur = cur.substitute_unchecked(&bindings);
    }
}

/// `Δf = e1e2 f + e2e1 f − e3e3 f − e4e4 f − (∇_{e1}e2) f − (∇_{e2}e1) f
///      + (∇_{e3}e3) f + (∇_{e4}e4) f`.
pub fn laplacian(p: &Poly, table: &ConnectionTable) -> Poly {
    let second = &(&apply_word(&[1, 2], p) + &apply_word(&[2, 1], p))
        - &(&apply_word(&[3, 3], p) + &apply_word(&[4, 4], p));
    let first = &(&apply_vector(table.nabla(3, 3), p) + &apply_vector(table.nabla(4, 4), p))
        - &(&apply_vector(table.nabla(1, 2), p) + &apply_vector(table.nabla(2, 1), p));
    &second + &first
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly;

    #[test]
    fn chain_and_leibniz_examples() {
        assert_eq!(apply_direction(4, &poly("k4^2")), poly("2*k4*D4 k4"));
        assert_eq!(apply_direction(4, &poly("xi*eta")), poly("D4 xi*eta + xi*D4 eta"));
        assert!(apply_direction(3, &poly("7/2")).is_zero());
    }

    #[test]
    fn flat_commutation_just_swaps() {
        let t = ConnectionTable::flat();
        assert_eq!(commute_jets(&poly("D1 D2 k1"), 1, 2, &t), poly("D2 D1 k1"));
        assert!(commute_jets(&poly("0"), 1, 2, &t).is_zero());
    }

    #[test]
    fn commutation_uses_bracket() {
        let t = ConnectionTable::generic();
        let got = commute_jets(&poly("D3 D4 k4"), 3, 4, &t);
        let br = bracket(3, 4, &t).unwrap();
        let want = &poly("D4 D3 k4") + &apply_vector(&br, &poly("k4"));
        assert_eq!(got, want);
    }

    #[test]
    fn canonical_form_has_non_increasing_words() {
        let t = ConnectionTable::generic();
        let (p, log) = canonicalize(&poly("D1 D2 D3 k4 + D2 D4 xi"), &t);
        assert!(!log.is_empty());
        assert!(p.symbols().iter().all(|s| s.is_canonical()));
    }

    #[test]
    fn laplacian_of_constant_vanishes() {
        assert!(laplacian(&poly("5"), &ConnectionTable::generic()).is_zero());
    }
}
