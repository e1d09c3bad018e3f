//! Case II endgame: the biharmonic equation along the flow is a multiple
//! of `κ³`, so `κ = 0` and the mean curvature vanishes.

use super::{ElimError, FlowSystem};
use crate::algebra::{poly, sym, Monomial, Poly};
use crate::certificate::{Certificate, Step, Verdict};
use crate::frame::{CaseTag, ShapeOperatorModel};

/// The biharmonic equation normalized so that `e4e4(kappa)` has coefficient
/// one, before and after substituting the flow.
fn normalized_equation(sys: &FlowSystem) -> Result<(Poly, Poly), ElimError> {
    let kk = sym::d(&[4, 4], sym::kappa());
    let lead = sys.biharmonic.coeff(&Monomial::var(kk));
    let bih = sys.biharmonic.scale(&lead.recip()?);
    let eliminated = sys.eliminate_jets(&bih)?;
    Ok((bih, eliminated))
}

/// The Case II biharmonic residual along the flow, sign-normalized (a
/// polynomial in `kappa` and `tau`; `6*kappa^3` when the derivation holds).
pub fn case2_residual(sys: &FlowSystem) -> Result<Poly, ElimError> {
    let (_, e) = normalized_equation(sys)?;
    Ok(if e.leading_coeff().is_negative() { -&e } else { e })
}

/// Substitute the flow into the biharmonic equation and read off the
/// residual. No side condition is used.
pub fn case2_collapse(sys: &FlowSystem) -> Result<Certificate, ElimError> {
    let mut cert = Certificate::new("case2-collapse", Some(CaseTag::CaseII));
    let kappa = sym::kappa();
    let kk = sym::d(&[4, 4], kappa.clone());
    let second = sys.eliminate_jets(&Poly::var(kk.clone()))?;
    let expected = poly("6*kappa*tau^2 - 2*kappa^3");
    cert.push(
        Step::new("e4e4(kappa)", "flow-differentiate")
            .input("p", "e4(-2 kappa tau)")
            .expected(&expected)
            .obtained(&second)
            .check(second == expected),
    );
    let (bih, eliminated) = normalized_equation(sys)?;
    let residual = if eliminated.leading_coeff().is_negative() { -&eliminated } else { eliminated.clone() };
    let (power, rest) = residual.strip_symbol_power(&kappa);
    let ok = residual == poly("6*kappa^3");
    cert.push(
        Step::new("residual", "flow-substitute")
            .input("biharmonic", &bih)
            .expected("6*kappa^3")
            .obtained(&residual)
            .check(ok)
            .note(format!("equation along the flow: {eliminated} = 0; kappa^{power} * {rest}")),
    );
    let s1 = ShapeOperatorModel::case2_normalized().trace();
    let at_zero = s1.substitute_one(&kappa, &Poly::zero());
    cert.push(
        Step::new("mean-curvature", "substitute")
            .input("s1", &s1)
            .input("kappa", "0")
            .expected("0")
            .obtained(&at_zero)
            .check(at_zero.is_zero()),
    );
    let closed = ok && rest.is_constant() && power > 0 && at_zero.is_zero();
    cert.push(
        Step::new("verdict", "conclude")
            .obtained("biharmonic ⇔ minimal")
            .verdict(if closed { Verdict::Closed } else { Verdict::Failed }),
    );
    cert.conclusion = "biharmonic ⇔ minimal".into();
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::derive_case2;

    #[test]
    fn residual_is_six_kappa_cubed() {
        let (cat, _) = derive_case2().unwrap();
        let sys = FlowSystem::case2(&cat).unwrap();
        let cert = case2_collapse(&sys).unwrap();
        assert!(cert.passed(), "{}", cert.render_text());
        assert_eq!(cert.step("residual").unwrap().obtained, "6*kappa^3");
        assert_eq!(cert.conclusion, "biharmonic ⇔ minimal");
    }
}
