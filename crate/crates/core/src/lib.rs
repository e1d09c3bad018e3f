//! Exact symbolic verifier and numeric falsifier for the classification of
//! biharmonic Lorentzian hypersurfaces in Minkowski 5-space whose shape
//! operator is non-diagonalizable (Jordan cases I and II).
//!
//! Layers, bottom up:
//!
//! * [`algebra`] — rationals, jet symbols, sparse polynomials, resultants,
//!   Sturm root isolation.
//! * [`frame`] — pseudo-orthonormal frame, connection table, directional
//!   derivatives with explicit bracket commutation, Laplacian, shape
//!   operators.
//! * [`forge`] — Codazzi, Gauss, bi-conservative, biharmonic and
//!   bracket-orthogonality constraints.
//! * [`closure`] — certified rewrite catalogs and the two scripted
//!   derivations with transversal-vanishing branch arguments.
//! * [`elimination`] — the e4-flow endgame: resultant elimination, the Case I
//!   obstruction and contradiction, the Case II collapse.
//! * [`ode`] — floating-point integration, invariant monitors, residual
//!   falsification and finite-difference cross-checks.
//! * [`certificate`] — replayable step records shared by all layers.
//! * [`pipeline`] — end-to-end case runs, trace replay and the numeric suite.

pub mod algebra;
pub mod certificate;
pub mod closure;
pub mod elimination;
pub mod forge;
pub mod frame;
pub mod ode;
pub mod pipeline;

pub use algebra::{poly, JetSym, Poly, Rat};
pub use certificate::{Certificate, Step, TraceBundle, Verdict};
pub use frame::CaseTag;

