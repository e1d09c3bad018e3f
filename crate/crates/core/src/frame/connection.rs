//! The symbolic connection table `∇_{e_i} e_j`.

use std::collections::BTreeMap;

use super::{FrameError, TangentExpr};
use crate::algebra::jet::sym;
use crate::algebra::{JetSym, Poly};

/// `∇_{e_i} e_j` for all `i, j`, parameterized by connection coefficients:
///
/// ```text
/// ∇_{e_i} e1 =  φ_i e1 + ω13(e_i) e3 + ω14(e_i) e4
/// ∇_{e_i} e2 = −φ_i e2 + ω23(e_i) e3 + ω24(e_i) e4
/// ∇_{e_i} e3 = ω23(e_i) e1 + ω13(e_i) e2 + ω34(e_i) e4
/// ∇_{e_i} e4 = ω24(e_i) e1 + ω14(e_i) e2 − ω34(e_i) e3
/// ```
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConnectionTable {
    entries: Vec<TangentExpr>,
}

impl ConnectionTable {
    /// The table with fully generic symbolic coefficients.
    pub fn generic() -> Self {
        let mut entries = Vec::with_capacity(16);
        for i in 1..=4u8 {
            let w = |j: u8, k: u8| Poly::var(sym::w(j, k, i));
            let phi = Poly::var(sym::phi(i));
            entries.push(TangentExpr::from_coeffs([phi.clone(), Poly::zero(), w(1, 3), w(1, 4)]));
            entries.push(TangentExpr::from_coeffs([Poly::zero(), -phi, w(2, 3), w(2, 4)]));
            entries.push(TangentExpr::from_coeffs([w(2, 3), w(1, 3), Poly::zero(), w(3, 4)]));
            entries.push(TangentExpr::from_coeffs([w(2, 4), w(1, 4), -w(3, 4), Poly::zero()]));
        }
        ConnectionTable { entries }
    }

    /// The flat table: every coefficient zero.
    pub fn flat() -> Self {
        ConnectionTable { entries: vec![TangentExpr::zero(); 16] }
    }

    /// `∇_{e_i} e_j`.
    pub fn nabla(&self, i: u8, j: u8) -> &TangentExpr {
        &self.entries[(i as usize - 1) * 4 + (j as usize - 1)]
    }

    /// Specializes the coefficients (e.g. to impose catalog reductions).
    pub fn substitute(&self, bindings: &BTreeMap<JetSym, Poly>) -> Self {
        ConnectionTable {
            entries: self.entries.iter().map(|t| t.map(|c| c.substitute_unchecked(bindings))).collect(),
        }
    }

    /// All connection-coefficient symbols appearing in the table.
    pub fn symbols(&self) -> Vec<JetSym> {
        let mut out = std::collections::BTreeSet::new();
        for t in &self.entries {
            for m in 1..=4 {
                out.extend(t.get(m).symbols());
            }
        }
        out.into_iter().collect()
    }
}

/// `[e_i, e_j] = ∇_{e_i} e_j − ∇_{e_j} e_i` (torsion-free connection).
pub fn bracket(i: u8, j: u8, table: &ConnectionTable) -> Result<TangentExpr, FrameError> {
    if i == j {
        return Err(FrameError::SameIndex(i));
    }
    Ok(table.nabla(i, j) - table.nabla(j, i))
}
