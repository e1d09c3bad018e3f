//! Polynomial constraints generated from the geometric equations: Codazzi,
//! Gauss, bi-conservativity `S(∇s1) + (s1/2)∇s1 = 0`, the scalar biharmonic
//! equation `Δs1 + s1·tr S² = 0`, and bracket orthogonality consequences of
//! `∇s1 ∥ e4`.
//!
//! The hypersurface has a unit spacelike normal with `∇^⊥ N = 0`, so every
//! equation is the scalar coefficient of `N`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::jet::sym;
use crate::algebra::{JetSym, Poly};
use crate::frame::{
    apply_direction, apply_vector, bracket, covariant, laplacian, metric, nabla_along, CaseTag, ConnectionTable,
    ShapeOperatorModel, TangentExpr,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ForgeError {
    #[error("unsupported gradient direction e{0} (only e1 and e4 are considered)")]
    UnsupportedDirection(u8),
    #[error("bracket of e{0} with itself")]
    SameIndex(u8),
}

/// Structured origin of a constraint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintKind {
    Codazzi([u8; 3]),
    Gauss([u8; 4]),
    Biconservative { direction: u8 },
    Biharmonic,
    BracketOrthogonality([u8; 2]),
    Derived(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub kind: ConstraintKind,
    pub case: CaseTag,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ConstraintKind::Codazzi([i, j, k]) => write!(f, "codazzi({i},{j},{k})"),
            ConstraintKind::Gauss([i, j, k, l]) => write!(f, "gauss({i},{j},{k},{l})"),
            ConstraintKind::Biconservative { direction } => write!(f, "biconservative(e{direction})"),
            ConstraintKind::Biharmonic => write!(f, "biharmonic"),
            ConstraintKind::BracketOrthogonality([i, j]) => write!(f, "bracket-orthogonality({i},{j})"),
            ConstraintKind::Derived(s) => write!(f, "{s}"),
        }
    }
}

/// An equation `poly = 0` with its origin and the side conditions
/// (polynomials asserted nonzero) under which it was derived.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub poly: Poly,
    pub provenance: Provenance,
    pub side: Vec<Poly>,
}

impl Constraint {
    pub fn new(poly: Poly, kind: ConstraintKind, case: CaseTag) -> Self {
        Constraint { poly, provenance: Provenance { kind, case }, side: Vec::new() }
    }

    pub fn with_side(mut self, side: Vec<Poly>) -> Self {
        self.side = side;
        self
    }

    pub fn id(&self) -> String {
        self.provenance.to_string()
    }

    pub fn is_vacuous(&self) -> bool {
        self.poly.is_zero()
    }

    /// One-line trace form: provenance, cleared polynomial, side conditions.
    pub fn trace_line(&self) -> String {
        let side: Vec<String> = self.side.iter().map(|s| s.to_string()).collect();
        format!("{}\t{}\t[{}]", self.id(), self.poly, side.join("; "))
    }
}

/// `(∇̄_X h)(Y, Z) = X(h(Y,Z)) − h(∇_X Y, Z) − h(Y, ∇_X Z)` for frame vectors.
fn nabla_h(x: u8, y: u8, z: u8, model: &ShapeOperatorModel, table: &ConnectionTable) -> Poly {
    let (ey, ez) = (TangentExpr::basis(y), TangentExpr::basis(z));
    let d = apply_direction(x, &model.h(y, z));
    &(&d - &model.h_vec(table.nabla(x, y), &ez)) - &model.h_vec(&ey, table.nabla(x, z))
}

/// Codazzi equation `(∇̄_{e_i} h)(e_j, e_k) = (∇̄_{e_j} h)(e_i, e_k)`.
pub fn codazzi(i: u8, j: u8, k: u8, model: &ShapeOperatorModel, table: &ConnectionTable) -> Constraint {
    let poly = &nabla_h(i, j, k, model, table) - &nabla_h(j, i, k, model, table);
    Constraint::new(poly, ConstraintKind::Codazzi([i, j, k]), model.case)
}

/// Gauss equation `⟨R(e_i,e_j)e_k, e_l⟩ = h(e_j,e_k)h(e_i,e_l) − h(e_i,e_k)h(e_j,e_l)`
/// with `R(X,Y) = ∇_X∇_Y − ∇_Y∇_X − ∇_{[X,Y]}`.
pub fn gauss(i: u8, j: u8, k: u8, l: u8, model: &ShapeOperatorModel, table: &ConnectionTable) -> Constraint {
    let kind = ConstraintKind::Gauss([i, j, k, l]);
    if i == j {
        return Constraint::new(Poly::zero(), kind, model.case);
    }
    let br = bracket(i, j, table).expect("distinct indices");
    let r = &(&covariant(i, table.nabla(j, k), table) - &covariant(j, table.nabla(i, k), table))
        - &nabla_along(&br, k, table);
    let lhs = r.pair(&TangentExpr::basis(l));
    let rhs = &(&model.h(j, k) * &model.h(i, l)) - &(&model.h(i, k) * &model.h(j, l));
    Constraint::new(&lhs - &rhs, kind, model.case)
}

/// Gradient `∇f = Σ g^{ab} e_a(f) e_b` of a scalar symbol; the inverse of
/// the frame metric equals the metric itself.
pub fn gradient(f: &JetSym) -> TangentExpr {
    let mut out = TangentExpr::zero();
    for a in 1..=4u8 {
        for b in 1..=4u8 {
            let g = metric(a, b);
            if g != 0 {
                let term = Poly::var(f.prepend(a)).scale(&g.into());
                out.set(b, out.get(b) + &term);
            }
        }
    }
    out
}

/// Which reading of "∇s1 ∥ e_dir" to impose for the derivative pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GradientReading {
    /// The pattern forced by the metric: `∇s1 = μ e_dir` with `∇s1 = Σ g^{ab} e_a(s1) e_b`.
    Metric,
    /// The pattern as written in prose for the e1 branch: `e1(s1) ≠ 0`,
    /// other first derivatives zero.
    AsWritten,
}

/// The derivative pattern `(vanishing directions, non-vanishing direction)`
/// of `s1` when `∇s1 ∥ e_dir`.
pub fn gradient_pattern(dir: u8, reading: GradientReading) -> Result<(Vec<u8>, u8), ForgeError> {
    let nonzero = match (dir, reading) {
        (4, _) => 4,
        (1, GradientReading::Metric) => 2,
        (1, GradientReading::AsWritten) => 1,
        (d, _) => return Err(ForgeError::UnsupportedDirection(d)),
    };
    Ok(((1..=4).filter(|&a| a != nonzero).collect(), nonzero))
}

/// Bi-conservativity `S(∇s1) + (s1/2)∇s1 = 0` under `∇s1 = μ e_dir`, μ ≢ 0.
///
/// Returns the eigenvalue relation (e.g. `2k1 + k3 + 3k4 = 0` for Case I,
/// direction 4) followed by the bookkeeping constraints `e_A(k) = 0` for the
/// eigenvalue `k` of `e_dir` in each vanishing direction. The side
/// condition is the non-vanishing derivative of that eigenvalue.
pub fn biconservative(
    model: &ShapeOperatorModel,
    dir: u8,
    reading: GradientReading,
) -> Result<Vec<Constraint>, ForgeError> {
    let (vanishing, nonzero) = gradient_pattern(dir, reading)?;
    let s1 = sym::s1();
    // Impose the derivative pattern on the formal gradient.
    let mut kill = BTreeMap::new();
    for &a in &vanishing {
        kill.insert(s1.prepend(a), Poly::zero());
    }
    let grad = gradient(&s1).map(|c| c.substitute_unchecked(&kill));
    let s1p = Poly::var(s1.clone());
    let half = crate::algebra::Rat::frac(1, 2);
    let lhs = &model.apply_vec(&grad) + &grad.scale(&s1p.scale(&half));
    let mu = Poly::var(s1.prepend(nonzero));
    // The e_dir component is (eigenvalue + s1/2)·(±μ); strip μ.
    let comp = lhs.get(dir);
    let (_, rel) = comp.strip_factor(&mu);
    let rel = rel.substitute_one(&s1, &model.trace());
    let (_, rel) = rel.primitive();
    let case = model.case;
    let eigen = model.apply(dir).get(dir).clone();
    let side_grad = Poly::var(JetSym::with_word(eigen_base(&eigen), vec![nonzero]));
    let mut out = vec![Constraint::new(rel, ConstraintKind::Biconservative { direction: dir }, case)
        .with_side(vec![side_grad.clone()])];
    for &a in &vanishing {
        let p = apply_direction(a, &eigen);
        out.push(
            Constraint::new(p, ConstraintKind::Derived(format!("gradient-pattern(e{a})")), case)
                .with_side(vec![side_grad.clone()]),
        );
    }
    Ok(out)
}

fn eigen_base(eigen: &Poly) -> crate::algebra::Base {
    eigen.symbols().into_iter().next().map(|s| s.base).unwrap_or(crate::algebra::Base::S1)
}

/// Scalar biharmonic equation `Δs1 + s1·tr S² = 0` with `s1` expressed
/// through the e4-eigenvalue relation `s1 = −2·(eigenvalue of e4)`.
pub fn biharmonic_scalar(model: &ShapeOperatorModel, table: &ConnectionTable) -> Constraint {
    let s1 = model.apply(4).get(4).scale(&(-2).into());
    let poly = &laplacian(&s1, table) + &(&s1 * &model.trace_sq());
    Constraint::new(poly, ConstraintKind::Biharmonic, model.case)
}

/// `⟨[e_i, e_j], e4⟩ = 0` for `i, j ≤ 3`, derived from
/// `[e_i,e_j](g) = e_i e_j g − e_j e_i g = 0` where `g` is the e4-eigenvalue
/// (`e_A g = 0`), which leaves `c^4_{ij}·e4(g) = 0` and `e4(g) ≠ 0`.
pub fn bracket_orthogonality(
    i: u8,
    j: u8,
    table: &ConnectionTable,
    gradient_symbol: &JetSym,
    case: CaseTag,
) -> Result<Constraint, ForgeError> {
    if i == j {
        return Err(ForgeError::SameIndex(i));
    }
    let br = bracket(i, j, table).map_err(|_| ForgeError::SameIndex(i))?;
    let g = Poly::var(gradient_symbol.clone());
    let mut kill = BTreeMap::new();
    for a in 1..=3 {
        kill.insert(gradient_symbol.prepend(a), Poly::zero());
    }
    let lhs = apply_vector(&br, &g).substitute_unchecked(&kill);
    let eg = Poly::var(gradient_symbol.prepend(4));
    let c4 = lhs.div_exact(&eg).unwrap_or(lhs);
    debug_assert_eq!(c4, br.pair(&TangentExpr::basis(4)));
    Ok(Constraint::new(c4, ConstraintKind::BracketOrthogonality([i, j]), case).with_side(vec![eg]))
}

/// The constant-mean-curvature branch: `Δc = 0`, so the biharmonic equation
/// leaves `c·tr S² = 0`; with `tr S² ≠ 0` this forces `c = 0`.
pub fn constant_mean_curvature(model: &ShapeOperatorModel, table: &ConnectionTable) -> Constraint {
    let c = Poly::var(JetSym::var('c'));
    let poly = &laplacian(&c.substitute_one(&JetSym::var('c'), &Poly::zero()), table) + &(&c * &model.trace_sq());
    Constraint::new(poly, ConstraintKind::Derived("constant-mean-curvature".into()), model.case)
        .with_side(vec![model.trace_sq()])
}
