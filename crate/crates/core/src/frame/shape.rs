//! Jordan-type shape-operator models and their second fundamental forms.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::TangentExpr;
use crate::algebra::jet::sym;
use crate::algebra::{determinant, JetSym, Poly};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum CaseTag {
    /// Characteristic polynomial `(t−k1)²(t−k3)(t−k4)`.
    CaseI,
    /// Characteristic polynomial `(t−k1)³(t−k4)`.
    CaseII,
}

impl CaseTag {
    pub fn slug(self) -> &'static str {
        match self {
            CaseTag::CaseI => "case1",
            CaseTag::CaseII => "case2",
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

/// Shape operator `S` given by its action on the frame.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ShapeOperatorModel {
    pub case: CaseTag,
    action: [TangentExpr; 4],
    pub eigen: Vec<Poly>,
}

fn vec_of(coeffs: [Poly; 4]) -> TangentExpr {
    TangentExpr::from_coeffs(coeffs)
}

impl ShapeOperatorModel {
    /// Case I: `S e1 = k1 e1`, `S e2 = e1 + k1 e2`, `S e3 = k3 e3`, `S e4 = k4 e4`.
    pub fn case1() -> Self {
        let (k1, k3, k4) = (Poly::var(sym::k1()), Poly::var(sym::k3()), Poly::var(sym::k4()));
        let z = Poly::zero;
        ShapeOperatorModel {
            case: CaseTag::CaseI,
            action: [
                vec_of([k1.clone(), z(), z(), z()]),
                vec_of([Poly::one(), k1.clone(), z(), z()]),
                vec_of([z(), z(), k3.clone(), z()]),
                vec_of([z(), z(), z(), k4.clone()]),
            ],
            eigen: vec![k1, k3, k4],
        }
    }

    /// Case II with eigenvalue expressions `k1`, `k4`:
    /// `S e1 = k1 e1 − e3`, `S e2 = k1 e2`, `S e3 = e2 + k1 e3`, `S e4 = k4 e4`.
    pub fn case2_with(k1: Poly, k4: Poly) -> Self {
        let z = Poly::zero;
        ShapeOperatorModel {
            case: CaseTag::CaseII,
            action: [
                vec_of([k1.clone(), z(), Poly::int(-1), z()]),
                vec_of([z(), k1.clone(), z(), z()]),
                vec_of([z(), Poly::one(), k1.clone(), z()]),
                vec_of([z(), z(), z(), k4.clone()]),
            ],
            eigen: vec![k1, k4],
        }
    }

    /// Case II with generic eigenvalue symbols `k1`, `k4`.
    pub fn case2() -> Self {
        Self::case2_with(Poly::var(sym::k1()), Poly::var(sym::k4()))
    }

    /// Case II normalized by the bi-conservative branch: `k1 = κ`, `k4 = −κ`.
    pub fn case2_normalized() -> Self {
        let kappa = Poly::var(sym::kappa());
        Self::case2_with(kappa.clone(), -kappa)
    }

    /// `S e_i`.
    pub fn apply(&self, i: u8) -> &TangentExpr {
        &self.action[i as usize - 1]
    }

    /// `S V` for a tangent expression.
    pub fn apply_vec(&self, v: &TangentExpr) -> TangentExpr {
        let mut out = TangentExpr::zero();
        for m in 1..=4 {
            let c = v.get(m);
            if !c.is_zero() {
                out = &out + &self.apply(m).scale(c);
            }
        }
        out
    }

    /// The model with `h → −h` (global sign flip of the second fundamental form).
    pub fn flipped(&self) -> Self {
        ShapeOperatorModel {
            case: self.case,
            action: self.action.clone().map(|t| -&t),
            eigen: self.eigen.iter().map(|e| -e).collect(),
        }
    }

    /// Second fundamental form coefficient `h_ij = ⟨S e_i, e_j⟩` (the
    /// coefficient of the unit normal).
    pub fn h(&self, i: u8, j: u8) -> Poly {
        self.apply(i).pair(&TangentExpr::basis(j))
    }

    /// `h(U, V)` extended bilinearly.
    pub fn h_vec(&self, u: &TangentExpr, v: &TangentExpr) -> Poly {
        self.apply_vec(u).pair(v)
    }

    /// Nonzero entries of the h-table with `i ≤ j`.
    pub fn h_table(&self) -> Vec<((u8, u8), Poly)> {
        let mut out = Vec::new();
        for i in 1..=4 {
            for j in i..=4 {
                let h = self.h(i, j);
                if !h.is_zero() {
                    out.push(((i, j), h));
                }
            }
        }
        out
    }

    /// Matrix entry `M[r][c]` = coefficient of `e_r` in `S e_c`.
    pub fn matrix(&self) -> Vec<Vec<Poly>> {
        (1..=4u8).map(|r| (1..=4u8).map(|c| self.apply(c).get(r).clone()).collect()).collect()
    }

    /// `det(t·I − M)`.
    pub fn characteristic_polynomial(&self, t: &JetSym) -> Poly {
        let m = self.matrix();
        let tp = Poly::var(t.clone());
        let a: Vec<Vec<Poly>> = (0..4)
            .map(|r| (0..4).map(|c| if r == c { &tp - &m[r][c] } else { -&m[r][c] }).collect())
            .collect();
        determinant(a)
    }

    /// Mean curvature `s1 = tr S`.
    pub fn trace(&self) -> Poly {
        (1..=4u8).fold(Poly::zero(), |acc, i| &acc + self.apply(i).get(i))
    }

    /// `tr S²`.
    pub fn trace_sq(&self) -> Poly {
        let m = self.matrix();
        let mut out = Poly::zero();
        for r in 0..4 {
            for c in 0..4 {
                out = &out + &(&m[r][c] * &m[c][r]);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly;

    #[test]
    fn characteristic_polynomials() {
        let t = JetSym::var('t');
        assert_eq!(
            ShapeOperatorModel::case1().characteristic_polynomial(&t),
            poly("(t - k1)^2*(t - k3)*(t - k4)")
        );
        assert_eq!(ShapeOperatorModel::case2().characteristic_polynomial(&t), poly("(t - k1)^3*(t - k4)"));
    }

    #[test]
    fn traces() {
        let m1 = ShapeOperatorModel::case1();
        assert_eq!(m1.trace(), poly("2*k1 + k3 + k4"));
        assert_eq!(m1.trace_sq(), poly("2*k1^2 + k3^2 + k4^2"));
        let m2 = ShapeOperatorModel::case2();
        assert_eq!(m2.trace(), poly("3*k1 + k4"));
        assert_eq!(m2.trace_sq(), poly("3*k1^2 + k4^2"));
    }

    #[test]
    fn case1_h_table_matches_the_displayed_table() {
        let m = ShapeOperatorModel::case1();
        let table: Vec<_> = m.h_table().into_iter().map(|(ij, h)| (ij, h.to_string())).collect();
        assert_eq!(
            table,
            vec![((1, 2), "-k1".to_string()), ((2, 2), "-1".into()), ((3, 3), "k3".into()), ((4, 4), "k4".into())]
        );
    }

    #[test]
    fn h_tables_are_symmetric() {
        for m in [ShapeOperatorModel::case1(), ShapeOperatorModel::case2()] {
            for i in 1..=4 {
                for j in 1..=4 {
                    assert_eq!(m.h(i, j), m.h(j, i), "{:?} ({i},{j})", m.case);
                }
            }
        }
    }

    #[test]
    fn case2_normalized_table() {
        let m = ShapeOperatorModel::case2_normalized();
        let table: Vec<_> = m.h_table().into_iter().map(|(ij, h)| (ij, h.to_string())).collect();
        assert_eq!(
            table,
            vec![
                ((1, 2), "-kappa".to_string()),
                ((1, 3), "-1".into()),
                ((3, 3), "kappa".into()),
                ((4, 4), "-kappa".into())
            ]
        );
    }
}
