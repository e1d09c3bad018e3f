//! Sylvester resultants and fraction-free determinants.
//!
//! The resultant of `p = Σ p_i x^i` (degree m) and `q = Σ q_j x^j` (degree n)
//! is the determinant of the (m+n)×(m+n) Sylvester matrix whose first n rows
//! are shifted copies of p's coefficients (highest first) and whose last m
//! rows are shifted copies of q's. With this convention
//! `res(x − a, x − b, x) = a − b`.
//!
//! Determinants use Bareiss fraction-free elimination: every intermediate
//! entry is a polynomial and each step divides exactly by the previous pivot.

use super::jet::JetSym;
use super::poly::Poly;
use super::AlgebraError;

/// Determinant of a square matrix of polynomials (Bareiss elimination with
/// row pivoting).
pub fn determinant(mut m: Vec<Vec<Poly>>) -> Poly {
    let n = m.len();
    if n == 0 {
        return Poly::one();
    }
    debug_assert!(m.iter().all(|r| r.len() == n), "square matrix");
    let mut sign = false;
    let mut prev = Poly::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            // Prefer the sparsest nonzero pivot below.
            let swap = (k + 1..n)
                .filter(|&i| !m[i][k].is_zero())
                .min_by_key(|&i| m[i][k].num_terms());
            match swap {
                Some(i) => {
                    m.swap(i, k);
                    sign = !sign;
                }
                None => return Poly::zero(),
            }
        }
        let pivot = m[k][k].clone();
        for i in k + 1..n {
            let mik = m[i][k].clone();
            for j in k + 1..n {
                let num = &(&pivot * &m[i][j]) - &(&mik * &m[k][j]);
                m[i][j] = if prev.as_constant().is_some_and(|c| c.is_one()) {
                    num
                } else {
                    num.div_exact(&prev).expect("Bareiss division is exact")
                };
            }
            m[i][k] = Poly::zero();
        }
        prev = pivot;
    }
    let d = m[n - 1][n - 1].clone();
    if sign {
        -d
    } else {
        d
    }
}

/// Sylvester matrix of `p` and `q` with respect to `x`.
pub fn sylvester_matrix(p: &Poly, q: &Poly, x: &JetSym) -> Result<Vec<Vec<Poly>>, AlgebraError> {
    let pc = p.coeffs_in(x);
    let qc = q.coeffs_in(x);
    let m = p.degree_in(x) as usize;
    let n = q.degree_in(x) as usize;
    if m == 0 || n == 0 {
        return Err(AlgebraError::DegenerateInput(x.to_string()));
    }
    let size = m + n;
    let mut rows = Vec::with_capacity(size);
    for r in 0..n {
        let mut row = vec![Poly::zero(); size];
        for i in 0..=m {
            row[r + i] = pc[m - i].clone();
        }
        rows.push(row);
    }
    for r in 0..m {
        let mut row = vec![Poly::zero(); size];
        for j in 0..=n {
            row[r + j] = qc[n - j].clone();
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Resultant of `p` and `q` with respect to `x`.
pub fn resultant(p: &Poly, q: &Poly, x: &JetSym) -> Result<Poly, AlgebraError> {
    Ok(determinant(sylvester_matrix(p, q, x)?))
}
