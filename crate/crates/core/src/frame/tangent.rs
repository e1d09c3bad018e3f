//! Tangent vector expressions `Σ c_m e_m` with polynomial coefficients.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use super::{metric, metric_with};
use crate::algebra::Poly;

/// A tangent vector field written in the frame: `coeffs[m-1]` multiplies `e_m`.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct TangentExpr {
    coeffs: [Poly; 4],
}

impl TangentExpr {
    pub fn zero() -> Self {
        TangentExpr::default()
    }

    /// The frame vector `e_i`.
    pub fn basis(i: u8) -> Self {
        let mut t = TangentExpr::zero();
        t.coeffs[i as usize - 1] = Poly::one();
        t
    }

    pub fn from_coeffs(coeffs: [Poly; 4]) -> Self {
        TangentExpr { coeffs }
    }

    /// Coefficient of `e_m`.
    pub fn get(&self, m: u8) -> &Poly {
        &self.coeffs[m as usize - 1]
    }

    pub fn set(&mut self, m: u8, p: Poly) {
        self.coeffs[m as usize - 1] = p;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn scale(&self, c: &Poly) -> TangentExpr {
        TangentExpr { coeffs: self.coeffs.clone().map(|x| &x * c) }
    }

    pub fn map<F: Fn(&Poly) -> Poly>(&self, f: F) -> TangentExpr {
        TangentExpr { coeffs: [f(&self.coeffs[0]), f(&self.coeffs[1]), f(&self.coeffs[2]), f(&self.coeffs[3])] }
    }

    /// Bilinear metric pairing `⟨self, other⟩`.
    pub fn pair(&self, other: &TangentExpr) -> Poly {
        self.pair_generic(other, metric)
    }

    /// Pairing under an alternative null pairing `⟨e1,e2⟩` (used to exhibit
    /// the sign-convention conflict).
    pub fn pair_with(&self, other: &TangentExpr, null_pairing: i64) -> Poly {
        self.pair_generic(other, |i, j| metric_with(i, j, null_pairing))
    }

    fn pair_generic<F: Fn(u8, u8) -> i64>(&self, other: &TangentExpr, g: F) -> Poly {
        let mut out = Poly::zero();
        for a in 1..=4u8 {
            for b in 1..=4u8 {
                let gab = g(a, b);
                if gab != 0 {
                    let prod = self.get(a) * other.get(b);
                    out = &out + &prod.scale(&gab.into());
                }
            }
        }
        out
    }
}

impl Add<&TangentExpr> for &TangentExpr {
    type Output = TangentExpr;
    fn add(self, rhs: &TangentExpr) -> TangentExpr {
        let mut out = self.clone();
        for m in 0..4 {
            out.coeffs[m] = &out.coeffs[m] + &rhs.coeffs[m];
        }
        out
    }
}

impl Sub<&TangentExpr> for &TangentExpr {
    type Output = TangentExpr;
    fn sub(self, rhs: &TangentExpr) -> TangentExpr {
        let mut out = self.clone();
        for m in 0..4 {
            out.coeffs[m] = &out.coeffs[m] - &rhs.coeffs[m];
        }
        out
    }
}

impl Neg for &TangentExpr {
    type Output = TangentExpr;
    fn neg(self) -> TangentExpr {
        self.map(|c| -c)
    }
}

impl fmt::Display for TangentExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for m in 1..=4u8 {
            let c = self.get(m);
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "({c})*e{m}")?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for TangentExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly;

    #[test]
    fn pairing_obeys_metric_table() {
        let u = &TangentExpr::basis(1).scale(&poly("x")) + &TangentExpr::basis(3).scale(&poly("y"));
        let v = &TangentExpr::basis(2).scale(&poly("z")) + &TangentExpr::basis(3);
        assert_eq!(u.pair(&v), poly("-x*z + y"));
        assert_eq!(u.pair(&v), v.pair(&u));
    }
}
