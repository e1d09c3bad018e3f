//! Exact arithmetic substrate: rationals, jet symbols, sparse multivariate
//! polynomials, univariate toolkit (gcd, Sturm isolation), resultants and
//! Gröbner bases.

pub mod groebner;
pub mod jet;
pub mod parse;
pub mod poly;
pub mod rat;
pub mod resultant;
pub mod univariate;

pub use groebner::GroebnerBasis;
pub use jet::{sym, Base, JetSym};
pub use poly::{Monomial, Poly};
pub use rat::Rat;
pub use resultant::{determinant, resultant};
pub use univariate::{gcd_poly, isolate_real_roots, IsolatedRoot, RootIsolation, UPoly};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("cyclic binding for symbol {0}")]
    CyclicBinding(String),
    #[error("expected a univariate polynomial, found {0} symbols")]
    NotUnivariate(usize),
    #[error("degenerate input: degree 0 in {0}")]
    DegenerateInput(String),
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("coefficients too large for rational-root enumeration")]
    TooLarge,
}

/// Shorthand used across the crate and its tests: parse a polynomial literal
/// that is known to be well formed.
pub fn poly(s: &str) -> Poly {
    Poly::parse(s).unwrap_or_else(|e| panic!("bad polynomial literal {s:?}: {e}"))
}
