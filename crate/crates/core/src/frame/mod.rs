//! The differential-geometric symbol layer: frame indices and the
//! pseudo-orthonormal metric, tangent expressions, the symbolic connection
//! table, directional derivatives of jets with explicit bracket commutation,
//! the Laplacian, and the two Jordan-type shape-operator models.
//!
//! Metric convention: `⟨e1,e1⟩ = ⟨e2,e2⟩ = 0`, `⟨e1,e2⟩ = −1`,
//! `⟨e3,e3⟩ = ⟨e4,e4⟩ = 1`. The negative null pairing is the only choice for
//! which the connection table below is metric-compatible, the
//! second-fundamental-form table equals `⟨S e_i, e_j⟩`, the Case II shape
//! operator is self-adjoint and the second-order operator in [`laplacian`]
//! is `−tr Hess`. [`metric_compatibility_defects`] demonstrates that the
//! positive pairing breaks compatibility.

mod connection;
mod derive;
mod shape;
mod tangent;

pub use connection::{bracket, ConnectionTable};
pub use derive::{
    apply_direction, apply_vector, apply_word, canonicalize, commute_jets, covariant, laplacian, nabla_along,
    Commutation,
};
pub use shape::{CaseTag, ShapeOperatorModel};
pub use tangent::TangentExpr;

pub use crate::algebra::jet::{Base, JetSym};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("frame index {0} out of range 1..=4")]
    BadIndex(u8),
    #[error("bracket of e{0} with itself")]
    SameIndex(u8),
}

/// A frame direction `e1..e4`; `e1, e2` are lightlike, `e3, e4` spacelike.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct FrameIndex(u8);

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Causal {
    Lightlike,
    Spacelike,
}

impl FrameIndex {
    pub fn new(i: u8) -> Result<Self, FrameError> {
        if (1..=4).contains(&i) {
            Ok(FrameIndex(i))
        } else {
            Err(FrameError::BadIndex(i))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn causal(self) -> Causal {
        if self.0 <= 2 {
            Causal::Lightlike
        } else {
            Causal::Spacelike
        }
    }

    pub fn all() -> [FrameIndex; 4] {
        [FrameIndex(1), FrameIndex(2), FrameIndex(3), FrameIndex(4)]
    }
}

impl fmt::Display for FrameIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// The null pairing `⟨e1,e2⟩` used throughout.
pub const NULL_PAIRING: i64 = -1;

/// Metric pairing `⟨e_i, e_j⟩` for `i, j ∈ 1..=4` with a given null pairing.
pub fn metric_with(i: u8, j: u8, null_pairing: i64) -> i64 {
    match (i, j) {
        (1, 2) | (2, 1) => null_pairing,
        (3, 3) | (4, 4) => 1,
        _ => 0,
    }
}

/// Metric pairing `⟨e_i, e_j⟩`.
pub fn metric(i: u8, j: u8) -> i64 {
    metric_with(i, j, NULL_PAIRING)
}

/// Index triples `(i, j, k)` where `⟨∇_{e_i}e_j, e_k⟩ + ⟨e_j, ∇_{e_i}e_k⟩ ≠ 0`
/// for the given null pairing (empty iff the table is metric-compatible).
pub fn metric_compatibility_defects(table: &ConnectionTable, null_pairing: i64) -> Vec<(u8, u8, u8)> {
    let mut out = Vec::new();
    for i in 1..=4 {
        for j in 1..=4 {
            for k in 1..=4 {
                let a = table.nabla(i, j).pair_with(&TangentExpr::basis(k), null_pairing);
                let b = TangentExpr::basis(j).pair_with(table.nabla(i, k), null_pairing);
                if !(&a + &b).is_zero() {
                    out.push((i, j, k));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_index_range_and_causality() {
        assert!(FrameIndex::new(0).is_err());
        assert!(FrameIndex::new(5).is_err());
        assert_eq!(FrameIndex::new(2).unwrap().causal(), Causal::Lightlike);
        assert_eq!(FrameIndex::new(3).unwrap().causal(), Causal::Spacelike);
    }

    #[test]
    fn metric_table() {
        for i in 1..=4 {
            for j in 1..=4 {
                assert_eq!(metric(i, j), metric(j, i));
            }
        }
        assert_eq!(metric(1, 1), 0);
        assert_eq!(metric(2, 2), 0);
        assert_eq!(metric(1, 2), -1);
        assert_eq!(metric(3, 3), 1);
        assert_eq!(metric(3, 4), 0);
    }

    #[test]
    fn connection_table_is_metric_compatible_for_all_triples() {
        let t = ConnectionTable::generic();
        assert!(metric_compatibility_defects(&t, NULL_PAIRING).is_empty());
    }

    #[test]
    fn positive_null_pairing_breaks_compatibility() {
        let t = ConnectionTable::generic();
        let defects = metric_compatibility_defects(&t, 1);
        assert!(!defects.is_empty());
        // ⟨∇_{e1}e1, e3⟩ + ⟨e1, ∇_{e1}e3⟩ = ω13(e1)·(1 + ⟨e1,e2⟩) = 2·ω13(e1).
        assert!(defects.contains(&(1, 1, 3)));
    }
}
