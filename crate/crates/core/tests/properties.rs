//! Property tests for the exact algebra: ring laws, substitution as a ring
//! homomorphism, resultant identities, Sturm isolation, the Leibniz rule of
//! frame derivations and Gröbner-basis canonicity.

use std::collections::BTreeMap;

use biharm_core::algebra::{isolate_real_roots, resultant, sym, GroebnerBasis, JetSym, Monomial, Poly, Rat};
use biharm_core::frame::apply_direction;
use proptest::prelude::*;

fn vars() -> Vec<JetSym> {
    vec![sym::k1(), sym::k3(), sym::k4()]
}

/// Small polynomials in `k1, k3, k4` with integer coefficients.
fn arb_poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec((-5i64..=5, 0u32..3, 0u32..3, 0u32..3), 0..5).prop_map(|terms| {
        let v = vars();
        Poly::from_terms(terms.into_iter().map(|(c, a, b, d)| {
            (Monomial::from_factors([(v[0].clone(), a), (v[1].clone(), b), (v[2].clone(), d)]), Rat::from_int(c))
        }))
    })
}

/// Univariate polynomials in `a` of degree 1..=3 with nonzero leading term.
fn arb_upoly() -> impl Strategy<Value = Poly> {
    (prop::collection::vec(-4i64..=4, 1..4), prop::sample::select(vec![-3i64, -2, -1, 1, 2, 3])).prop_map(
        |(low, lead)| {
            let a = Poly::var(sym::a());
            let mut p = Poly::int(lead) * a.pow(low.len() as u32);
            for (k, c) in low.iter().enumerate() {
                p = p + Poly::int(*c) * a.pow(k as u32);
            }
            p
        },
    )
}

/// Evaluates a univariate polynomial in `a` at a rational point.
fn at(p: &Poly, x: &Rat) -> Rat {
    p.substitute_one(&sym::a(), &Poly::constant(x.clone())).as_constant().expect("univariate in a")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_laws(p in arb_poly(), q in arb_poly(), r in arb_poly()) {
        prop_assert_eq!(&p + &q, &q + &p);
        prop_assert_eq!(&p * &q, &q * &p);
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
        prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
        prop_assert!((&p - &p).is_zero());
        prop_assert_eq!(&p * &Poly::one(), p.clone());
    }

    #[test]
    fn text_round_trip(p in arb_poly()) {
        prop_assert_eq!(Poly::parse(&p.to_text()).unwrap(), p);
    }

    #[test]
    fn substitution_is_a_ring_homomorphism(p in arb_poly(), q in arb_poly(), img in arb_poly()) {
        // Images mentioning the bound symbol are rejected as cyclic.
        let k3 = Poly::var(sym::k3());
        prop_assert!(p.substitute(&BTreeMap::from([(sym::k3(), &img * &k3 + k3.clone())])).is_err());
        let img = img.substitute_one(&sym::k3(), &Poly::var(sym::k1()));
        let b = BTreeMap::from([(sym::k3(), img)]);
        let s = |x: &Poly| x.substitute(&b).unwrap();
        prop_assert_eq!(s(&(&p + &q)), &s(&p) + &s(&q));
        prop_assert_eq!(s(&(&p * &q)), &s(&p) * &s(&q));
        prop_assert!(!s(&p).mentions(&sym::k3()));
    }

    #[test]
    fn leibniz_rule(p in arb_poly(), q in arb_poly(), i in 1u8..=4) {
        let lhs = apply_direction(i, &(&p * &q));
        let rhs = &(&apply_direction(i, &p) * &q) + &(&p * &apply_direction(i, &q));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn resultant_with_linear_factor_is_evaluation(q in arb_upoly(), r in -5i64..=5) {
        // res(a - r, q) = q(r)
        let lin = Poly::var(sym::a()) - Poly::int(r);
        let res = resultant(&lin, &q, &sym::a()).unwrap();
        prop_assert_eq!(res.as_constant().unwrap(), at(&q, &Rat::from_int(r)));
    }

    #[test]
    fn resultant_is_antisymmetric_up_to_sign(p in arb_upoly(), q in arb_upoly()) {
        let a = sym::a();
        let (m, n) = (p.degree_in(&a), q.degree_in(&a));
        let pq = resultant(&p, &q, &a).unwrap();
        let qp = resultant(&q, &p, &a).unwrap();
        let sign = if (m * n) % 2 == 0 { Poly::one() } else { Poly::int(-1) };
        prop_assert_eq!(pq, &sign * &qp);
    }

    #[test]
    fn resultant_vanishes_on_common_factor(p in arb_upoly(), q in arb_upoly(), r in -5i64..=5) {
        let lin = Poly::var(sym::a()) - Poly::int(r);
        let res = resultant(&(&p * &lin), &(&q * &lin), &sym::a()).unwrap();
        prop_assert!(res.is_zero());
    }

    #[test]
    fn sturm_isolates_distinct_rational_roots(mut roots in prop::collection::btree_set(-20i64..=20, 1..6), shift in 1i64..5) {
        // ∏ (shift·a − r): distinct rational roots r/shift, all found, each once.
        let a = Poly::var(sym::a());
        let mut p = Poly::one();
        for r in &roots {
            p = &p * &(&a * &Poly::int(shift) - Poly::int(*r));
        }
        let iso = isolate_real_roots(&p).unwrap();
        prop_assert_eq!(iso.count(), roots.len());
        prop_assert!(iso.multiplicity_free);
        for r in std::mem::take(&mut roots) {
            prop_assert!(iso.covers(&Rat::frac(r, shift)));
        }
        // Intervals `(lo, hi]` are ordered and pairwise disjoint.
        let mut iv = iso.intervals();
        iv.sort();
        for w in iv.windows(2) {
            prop_assert!(w[0].1 <= w[1].0);
        }
    }

    #[test]
    fn sturm_ignores_positive_definite_factor(roots in prop::collection::btree_set(-9i64..=9, 1..4), c in 1i64..6) {
        let a = Poly::var(sym::a());
        let mut p = &a.pow(2) + &Poly::int(c);
        for r in &roots {
            p = &p * &(&a - Poly::int(*r));
        }
        prop_assert_eq!(isolate_real_roots(&p).unwrap().count(), roots.len());
    }

    #[test]
    fn groebner_membership(g1 in arb_poly(), g2 in arb_poly(), h1 in arb_poly(), h2 in arb_poly()) {
        prop_assume!(!g1.is_zero() || !g2.is_zero());
        let gb = GroebnerBasis::new(&[g1.clone(), g2.clone()], &vars()).unwrap();
        prop_assert!(gb.contains(&(&(&h1 * &g1) + &(&h2 * &g2))).unwrap());
        prop_assert!(gb.contains(&g1).unwrap() && gb.contains(&g2).unwrap());
    }

    #[test]
    fn groebner_basis_is_independent_of_generator_order(
        gens in prop::collection::vec(arb_poly(), 1..4),
        probe in arb_poly(),
        seed in any::<u64>(),
    ) {
        let mut shuffled = gens.clone();
        let n = shuffled.len();
        for k in (1..n).rev() {
            shuffled.swap(k, (seed as usize).wrapping_mul(k + 7) % (k + 1));
        }
        shuffled.reverse();
        let a = GroebnerBasis::new(&gens, &vars()).unwrap();
        let b = GroebnerBasis::new(&shuffled, &vars()).unwrap();
        prop_assert_eq!(a.polys(), b.polys());
        prop_assert_eq!(a.reduce(&probe).unwrap(), b.reduce(&probe).unwrap());
    }
}
