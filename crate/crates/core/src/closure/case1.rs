//! Case I: `S e1 = k1 e1`, `S e2 = e1 + k1 e2`, `S e3 = k3 e3`, `S e4 = k4 e4`.
//!
//! The script derives the connection-form catalog from the chosen Codazzi
//! instances, the bracket-orthogonality consequences of `∇s1 ∥ e4`, the
//! commutation identities for `e4(k4)`, a handful of Gauss instances, and
//! the two transversal-vanishing branch arguments. It ends with the flow
//! system for `(k1, k3, k4, ξ, η)` with `ξ = ω14(e2)`, `η = ω34(e3)` and the
//! algebraic constraint `ξη = k1k3`.

use super::script::{Expect, Script};
use super::{Catalog, ClosureError};
use crate::algebra::{poly, sym, JetSym, Poly};
use crate::certificate::{Certificate, Step, Verdict};
use crate::forge::{biconservative, biharmonic_scalar, bracket_orthogonality, codazzi, gauss, GradientReading};
use crate::frame::{apply_direction, apply_vector, apply_word, bracket, CaseTag, ConnectionTable, ShapeOperatorModel};

/// Output of the Case I derivation.
#[derive(Clone, Debug)]
pub struct Case1Derivation {
    pub catalog: Catalog,
    pub certificate: Certificate,
    /// Certificates of the e3 and e2 branch arguments.
    pub branches: Vec<Certificate>,
}

fn theta() -> JetSym {
    sym::w(2, 3, 1)
}

fn nu() -> JetSym {
    sym::w(2, 3, 3)
}

/// Codazzi instance, reduced and oriented.
fn cod(s: &mut Script, m: &ShapeOperatorModel, t: &ConnectionTable, ijk: (u8, u8, u8), solve: JetSym, e: Expect<'_>) -> Result<(), ClosureError> {
    let c = codazzi(ijk.0, ijk.1, ijk.2, m, t);
    s.rule(&c.id(), "codazzi", &c.poly, &solve, e)?;
    Ok(())
}

fn gau(s: &mut Script, m: &ShapeOperatorModel, t: &ConnectionTable, ijkl: [u8; 4], solve: JetSym, e: Expect<'_>) -> Result<(), ClosureError> {
    let c = gauss(ijkl[0], ijkl[1], ijkl[2], ijkl[3], m, t);
    s.rule(&c.id(), "gauss", &c.poly, &solve, e)?;
    Ok(())
}

/// Everything up to (but excluding) the transversal-vanishing arguments.
fn base_script() -> Result<Script, ClosureError> {
    let m = ShapeOperatorModel::case1();
    let t = ConnectionTable::generic();
    let mut s = Script::new("case1-catalog", CaseTag::CaseI);
    for (id, p) in [
        ("k1-k3", "k1 - k3"),
        ("k1-k4", "k1 - k4"),
        ("k3-k4", "k3 - k4"),
        ("e4(k4)", "D4 k4"),
        ("k4", "k4"),
    ] {
        s.cat.assume(id, poly(p));
    }
    s.note(
        "assumptions",
        "register",
        "k1-k3, k1-k4, k3-k4, e4(k4), k4 nonzero",
        "e4(k4) != 0 because grad s1 does not vanish; k4 != 0 because s1 = -2 k4 is non-minimal",
    );

    // Gradient direction e4: eigenvalue relation and derivative pattern.
    let bc = biconservative(&m, 4, GradientReading::Metric)?;
    let trace = s.constraint("trace", "biconservative", &bc[0].poly, Expect::Exact("2*k1 + k3 + 3*k4"))?;
    s.cat.algebraic.insert(sym::k3(), poly("-2*k1 - 3*k4"));
    for (a, c) in (1..=3u8).zip(&bc[1..]) {
        s.rule(&format!("gradient-pattern(e{a})"), "biconservative", &c.poly, &sym::d(&[a], sym::k4()), Expect::Exact(&format!("D{a} k4")))?;
    }
    for a in 1..=3u8 {
        s.rule(
            &format!("trace-derivative(e{a})"),
            "differentiate",
            &apply_direction(a, &trace),
            &sym::d(&[a], sym::k3()),
            Expect::Exact(&format!("D{a} k3 + 2*D{a} k1")),
        )?;
    }

    // The Codazzi instances of the script.
    for a in 1..=3u8 {
        cod(&mut s, &m, &t, (a, 4, 4), sym::w(a, 4, 4), Expect::Exact(&format!("w{a}4(e4)")))?;
    }
    s.alias("define eta", &sym::w(3, 4, 3), &sym::eta());
    cod(&mut s, &m, &t, (4, 3, 3), sym::d(&[4], sym::k3()), Expect::Published("D4 k3 - eta*(k3 - k4)"))?;
    cod(&mut s, &m, &t, (2, 1, 1), sym::d(&[1], sym::k1()), Expect::Exact("D1 k1"))?;
    s.confirm("e1(k1)=e1(k3)=0", "e1(k1) = e1(k3) = 0", "D1 k1 + D1 k3")?;
    cod(&mut s, &m, &t, (1, 3, 3), sym::w(1, 3, 3), Expect::Exact("w13(e3)"))?;
    cod(&mut s, &m, &t, (3, 1, 1), sym::w(1, 3, 1), Expect::Exact("w13(e1)"))?;
    cod(&mut s, &m, &t, (3, 1, 2), sym::d(&[3], sym::k1()), Expect::Exact("D3 k1 - (k3 - k1)*w23(e1)"))?;
    let dup = codazzi(1, 3, 2, &m, &t);
    s.vacuous(&dup.id(), "codazzi", &dup.poly)?;
    // The second half of the published pair needs one more instance.
    cod(&mut s, &m, &t, (2, 3, 1), sym::w(1, 3, 2), Expect::Exact("w13(e2) - w23(e1)"))?;
    s.confirm("w23(e1)=e3(k1)/(k3-k1)", "w23(e1) = e3(k1)/(k3-k1)", "w23(e1)*(k3 - k1) - D3 k1")?;
    s.confirm("w13(e2)=e3(k1)/(k3-k1)", "w13(e2) = e3(k1)/(k3-k1)", "w13(e2)*(k3 - k1) - D3 k1")?;

    // Bracket orthogonality: <[e_i,e_j], e4> = 0 for i, j <= 3.
    s.alias("define xi", &sym::w(1, 4, 2), &sym::xi());
    let b12 = bracket_orthogonality(1, 2, &t, &sym::k4(), CaseTag::CaseI)?;
    s.rule(&b12.id(), "bracket-orthogonality", &b12.poly, &sym::w(2, 4, 1), Expect::Exact("w24(e1) - xi"))?;
    cod(&mut s, &m, &t, (1, 2, 4), sym::w(1, 4, 1), Expect::Exact("w14(e1)"))?;
    cod(&mut s, &m, &t, (1, 4, 2), sym::d(&[4], sym::k1()), Expect::Published("D4 k1 - xi*(k4 - k1)"))?;
    let b13 = bracket_orthogonality(1, 3, &t, &sym::k4(), CaseTag::CaseI)?;
    s.rule(&b13.id(), "bracket-orthogonality", &b13.poly, &sym::w(3, 4, 1), Expect::Exact("w34(e1) - w14(e3)"))?;
    cod(&mut s, &m, &t, (1, 3, 4), sym::w(1, 4, 3), Expect::Exact("w14(e3)"))?;
    cod(&mut s, &m, &t, (3, 4, 1), sym::w(1, 3, 4), Expect::Exact("w13(e4)"))?;
    let b23 = bracket_orthogonality(2, 3, &t, &sym::k4(), CaseTag::CaseI)?;
    s.rule(&b23.id(), "bracket-orthogonality", &b23.poly, &sym::w(3, 4, 2), Expect::Exact("w34(e2) - w24(e3)"))?;
    cod(&mut s, &m, &t, (2, 3, 4), sym::w(2, 4, 3), Expect::Exact("w24(e3)"))?;
    cod(&mut s, &m, &t, (2, 4, 3), sym::w(2, 3, 4), Expect::Exact("w23(e4)"))?;

    // Commutation identities e_A e4(k4) = e_A e4 e4(k4) = 0.
    let k4 = Poly::var(sym::k4());
    let e = Poly::var(sym::d(&[4], sym::k4()));
    for a in 1..=3u8 {
        let br = bracket(a, 4, &t).expect("distinct");
        let w1 = &apply_word(&[4, a], &k4) + &apply_vector(&br, &k4);
        s.certified_rule(&format!("commute(e{a},e4)k4"), "commute", &sym::d(&[a, 4], sym::k4()), &w1, &Poly::zero())?;
        let w2 = &apply_word(&[4, a], &e) + &apply_vector(&br, &e);
        s.certified_rule(&format!("commute(e{a},e4)e4(k4)"), "commute", &sym::d(&[a, 4, 4], sym::k4()), &w2, &Poly::zero())?;
    }

    // Gauss instances along the flow and across it.
    gau(&mut s, &m, &t, [1, 4, 2, 4], sym::d(&[4], sym::xi()), Expect::Published("D4 xi + xi^2 + k1*k4"))?;
    gau(&mut s, &m, &t, [3, 4, 3, 4], sym::d(&[4], sym::eta()), Expect::Published("D4 eta - eta^2 - k3*k4"))?;
    gau(&mut s, &m, &t, [1, 3, 2, 4], sym::d(&[3], sym::xi()), Expect::Published("(k1 - k3)*D3 xi - D3 k1*(xi + eta)"))?;
    gau(&mut s, &m, &t, [1, 4, 2, 3], sym::d(&[4], theta()), Expect::Nothing)?;
    s.confirm(
        "e3e4(k1)",
        "e3 e4(k1) = e3(k1)/(k1-k3) (xi (k3+k4-2k1) + eta (k4-k1))",
        "(k1 - k3)*D3 D4 k1 - D3 k1*(xi*(k3 + k4 - 2*k1) + eta*(k4 - k1))",
    )?;

    // The trace relation along the flow, and its e3 derivative.
    let flow = s.constraint(
        "trace-flow",
        "differentiate",
        &apply_direction(4, &trace),
        Expect::Published("3*D4 k4 + 2*(k4 - k1)*xi + (k3 - k4)*eta"),
    )?;
    s.rule(
        "e3(trace-flow)",
        "differentiate",
        &apply_direction(3, &flow),
        &sym::d(&[3], sym::eta()),
        Expect::Published("(k3 - k4)*(k3 - k1)*D3 eta - 2*(k3 + k4 - 2*k1)*D3 k1*(xi + eta)"),
    )?;

    // The scalar biharmonic equation.
    let bih = biharmonic_scalar(&m, &t);
    s.constraint(
        "biharmonic",
        "biharmonic",
        &bih.poly,
        Expect::Published("D4 D4 k4 + (w24(e1) + w14(e2) - w34(e3))*D4 k4 - k4*(2*k1^2 + k3^2 + k4^2)"),
    )?;
    Ok(s)
}

/// Branch argument along a transversal direction: the derivative of the
/// biharmonic equation factors as `g·Q`; on `g ≠ 0` the relation `Q = 0`
/// is solved for `e4(k4)` and differentiated once more, which leaves a
/// product of side conditions — a contradiction. Hence `g = 0`.
fn branch(s: &mut Script, direction: u8, g: &JetSym, published: Expect<'_>) -> Result<Certificate, ClosureError> {
    let name = format!("case1-transversal-e{direction}");
    let bih = s.cat.constraint("biharmonic").expect("biharmonic constraint present").clone();
    let raw = apply_direction(direction, &bih);
    let red = s.reduce(&raw)?;
    let id = format!("e{direction}(biharmonic)");
    if !red.multiplier.iter().all(|m| s.cat.certified_nonzero(m)) {
        return Err(ClosureError::InitNotCertified { step: id, init: format!("{:?}", red.multiplier) });
    }
    let nf = s.cat.strip_side(&red.poly).primitive().1;
    let step = Step::new(&id, "differentiate").input("constraint", &bih).obtained(&nf);
    let step = match published {
        Expect::Published(e) => {
            let ok = s.agrees(&nf, &poly(e))?;
            step.expected(e).verdict(if ok { Verdict::Certified } else { Verdict::Diff }).note(
                "the published bracket has the opposite sign of its constant term; the branch closes either way",
            )
        }
        _ => step.verdict(Verdict::Derived),
    };
    s.cert.push(step);

    let mut cert = Certificate::new(&name, Some(CaseTag::CaseI));
    let gp = Poly::var(g.clone());
    let q = nf.div_exact(&gp).ok_or_else(|| ClosureError::BranchNotClosed { step: id.clone(), residual: nf.to_string() })?;
    cert.push(
        Step::new("factor", "divide")
            .input("p", &nf)
            .input("d", &gp)
            .obtained(&q)
            .check(true)
            .note(format!("e{direction}(biharmonic) = {g} * Q")),
    );

    let mut b = Script { cat: s.cat.clone(), cert: Certificate::new(&name, Some(CaseTag::CaseI)) };
    b.cat.assume(&format!("branch {g}"), gp.clone());
    cert.push(
        Step::new("hypothesis", "assume")
            .obtained(format!("{g} != 0"))
            .verdict(Verdict::Derived)
            .note("branch on the vanishing of the transversal derivative; the complementary branch is the conclusion"),
    );

    // xi + eta cannot vanish on the branch: Q restricted to eta = -xi is a
    // product of side conditions.
    let sum = poly("xi + eta");
    let on_locus = q.substitute_one(&sym::eta(), &poly("-xi"));
    let sum_ok = b.cat.certified_nonzero(&on_locus);
    cert.push(
        Step::new("xi+eta!=0", "substitute")
            .input("p", &q)
            .input("eta", "-xi")
            .obtained(&on_locus)
            .check(sum_ok)
            .note("Q at eta = -xi is a product of side conditions"),
    );
    if !sum_ok {
        return Err(ClosureError::BranchNotClosed { step: format!("{name}/xi+eta"), residual: on_locus.to_string() });
    }
    b.cat.assume("xi+eta", sum);

    let e = sym::d(&[4], sym::k4());
    let rel = b.rule("solve Q", "orient", &q, &e, Expect::Nothing)?;
    cert.push(Step::new("solve Q", "orient").input("constraint", &q).obtained(rel.display()).verdict(Verdict::Derived));
    let again = apply_direction(direction, &q);
    let red2 = b.reduce(&again)?;
    let stripped = b.cat.strip_side(&red2.poly);
    let mult_ok = red2.multiplier.iter().all(|m| b.cat.certified_nonzero(m));
    let closed = !red2.poly.is_zero() && stripped.is_constant() && mult_ok;
    cert.push(
        Step::new(format!("e{direction}(Q)"), "differentiate")
            .input("constraint", &q)
            .obtained(b.cat.factor_over_register(&red2.poly))
            .verdict(if closed { Verdict::Closed } else { Verdict::Failed })
            .note("a nonzero product of side conditions must vanish: the branch is empty"),
    );
    if !closed {
        return Err(ClosureError::BranchNotClosed { step: name, residual: red2.poly.to_string() });
    }
    cert.conclusion = format!("{g} = 0");

    // Back on the main catalog: the factor vanishes.
    s.cat.relations.push(super::Relation {
        id: format!("transversal-e{direction}"),
        pattern: g.clone(),
        init: Poly::one(),
        tail: Poly::zero(),
        side: vec![],
        source: raw,
    });
    s.cert.push(
        Step::new(format!("transversal-e{direction}"), "branch-closure")
            .obtained(format!("{g} = 0"))
            .verdict(Verdict::Certified)
            .note(format!("see certificate {name}")),
    );
    Ok(cert)
}

/// Run the full Case I derivation.
pub fn derive_case1() -> Result<Case1Derivation, ClosureError> {
    let m = ShapeOperatorModel::case1();
    let t = ConnectionTable::generic();
    let mut s = base_script()?;
    let mut branches = Vec::new();

    branches.push(branch(
        &mut s,
        3,
        &theta(),
        Expect::Published("D3 k1*((xi + eta)*D4 k4 - (k1 - k3)*(k3 - k4)*k4)"),
    )?);
    s.confirm("e3(k1)=e3(k3)=0", "e3(k1) = e3(k3) = 0", "D3 k1 + D3 k3")?;
    s.confirm("w23(e1)=w13(e2)=0", "w23(e1) = w13(e2) = 0", "w23(e1) + w13(e2)")?;

    // The e2 analogue, written out in full.
    cod(&mut s, &m, &t, (2, 3, 3), sym::d(&[2], sym::k1()), Expect::Nothing)?;
    cod(&mut s, &m, &t, (1, 2, 2), sym::phi(1), Expect::Nothing)?;
    gau(&mut s, &m, &t, [2, 3, 3, 4], sym::d(&[2], sym::eta()), Expect::Nothing)?;
    let flow = s.cat.constraint("trace-flow").expect("trace-flow present").clone();
    s.rule("e2(trace-flow)", "differentiate", &apply_direction(2, &flow), &sym::d(&[2], sym::xi()), Expect::Nothing)?;
    branches.push(branch(&mut s, 2, &nu(), Expect::Nothing)?);
    s.confirm("e2(k1)=e2(k3)=0", "e2(k1) = e2(k3) = 0", "D2 k1 + D2 k3")?;
    s.confirm("w23(e3)=0", "w23(e3) = 0", "w23(e3)")?;

    // The flow system and the product constraint.
    let g = gauss(1, 3, 2, 3, &m, &t);
    s.constraint("product", "gauss", &g.poly, Expect::Published("xi*eta - k1*k3"))?;
    s.confirm("e4(xi)", "e4(xi) = -xi^2 - k1 k4", "D4 xi + xi^2 + k1*k4")?;
    s.confirm("e4(eta)", "e4(eta) = eta^2 + k3 k4", "D4 eta - eta^2 - k3*k4")?;
    s.confirm("w34(e2)=w24(e3)=w23(e4)=0", "w34(e2) = w24(e3) = w23(e4) = 0", "w34(e2) + w24(e3) + w23(e4)")?;
    s.confirm("w34(e1)=w14(e3)=w13(e4)=0", "w34(e1) = w14(e3) = w13(e4) = 0", "w34(e1) + w14(e3) + w13(e4)")?;
    s.confirm(
        "e4e4(k1)",
        "e4 e4(k1) = xi e4(k4) + (k1-k4)(k1 k4 + 2 xi^2)",
        "D4 D4 k1 - xi*D4 k4 - (k1 - k4)*(k1*k4 + 2*xi^2)",
    )?;
    s.cert.conclusion = "catalog closed; flow system for (k1, k3, k4, xi, eta) with xi*eta = k1*k3".into();
    Ok(Case1Derivation { catalog: s.cat, certificate: s.cert, branches })
}

/// Certificate of the transversal-vanishing argument along `e2` or `e3`.
pub fn transversal_vanishing(direction: u8) -> Result<Certificate, ClosureError> {
    if direction != 2 && direction != 3 {
        return Err(ClosureError::NotTransversal(direction));
    }
    let d = derive_case1()?;
    d.branches
        .into_iter()
        .find(|c| c.name.ends_with(&format!("e{direction}")))
        .ok_or(ClosureError::NotTransversal(direction))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::reduce;

    fn derived() -> Case1Derivation {
        derive_case1().expect("case I derivation closes")
    }

    fn rhs(cat: &Catalog, lhs: &str) -> Poly {
        reduce(&poly(lhs), cat).unwrap().poly
    }

    #[test]
    fn flow_rules_are_reproduced() {
        let d = derived();
        let c = &d.catalog;
        assert_eq!(rhs(c, "D4 xi"), poly("-xi^2 - k1*k4"));
        assert_eq!(rhs(c, "D4 eta"), poly("eta^2 + k3*k4"));
        assert_eq!(rhs(c, "D4 k1"), poly("xi*(k4 - k1)"));
        assert_eq!(rhs(c, "D4 k3"), poly("eta*(k3 - k4)"));
        assert_eq!(c.constraint("product").unwrap(), &poly("k1*k3 - xi*eta"));
    }

    #[test]
    fn connection_coefficients_vanish() {
        let d = derived();
        for w in ["w14(e4)", "w24(e4)", "w34(e4)", "w34(e2)", "w24(e3)", "w23(e4)", "w23(e1)", "w13(e2)", "w23(e3)"] {
            assert!(rhs(&d.catalog, w).is_zero(), "{w}");
        }
        assert!(rhs(&d.catalog, "D2 D4 D4 k4").is_zero());
    }

    #[test]
    fn every_step_passes_and_branches_close() {
        let d = derived();
        assert!(d.certificate.passed());
        assert_eq!(d.branches.len(), 2);
        for b in &d.branches {
            assert!(b.passed());
            assert!(b.steps.iter().any(|s| s.verdict == Verdict::Closed));
        }
        // The only recorded disagreement with the published displays is the
        // sign inside the e3-differentiated biharmonic equation.
        let diffs: Vec<&str> = d.certificate.diffs().iter().map(|s| s.id.as_str()).collect();
        assert_eq!(diffs, vec!["e3(biharmonic)"]);
    }

    #[test]
    fn relations_reverify_and_side_conditions_survive() {
        let d = derived();
        assert!(d.catalog.reverify().unwrap().is_empty());
        assert!(d.catalog.contradicted_side_conditions().unwrap().is_empty());
    }

    #[test]
    fn reduction_is_idempotent() {
        let d = derived();
        for p in ["D4 D4 k1", "D3 D4 eta*xi", "D4 D4 D4 k3 + w24(e1)^2", "D2 D1 xi"] {
            let once = reduce(&poly(p), &d.catalog).unwrap().poly;
            let twice = reduce(&once, &d.catalog).unwrap();
            assert_eq!(twice.poly, once);
            assert!(twice.multiplier.is_empty());
        }
    }

    #[test]
    fn transversal_direction_checks() {
        assert!(matches!(transversal_vanishing(4), Err(ClosureError::NotTransversal(4))));
        let c = transversal_vanishing(3).unwrap();
        assert_eq!(c.conclusion, "w23(e1) = 0");
        let c = transversal_vanishing(2).unwrap();
        assert_eq!(c.conclusion, "w23(e3) = 0");
    }
}
