//! Dense univariate polynomials over ℚ: Euclidean gcd, square-free
//! decomposition, Sturm sequences and certified real-root isolation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::jet::JetSym;
use super::poly::{Monomial, Poly};
use super::rat::Rat;
use super::AlgebraError;

/// `Σ coeffs[k]·x^k` with no trailing zeros (the zero polynomial is empty).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct UPoly {
    pub var: JetSym,
    coeffs: Vec<Rat>,
}

impl UPoly {
    pub fn new(var: JetSym, mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UPoly { var, coeffs }
    }

    /// Views a polynomial in at most one symbol as univariate in `var`.
    pub fn from_poly(p: &Poly, var: &JetSym) -> Result<Self, AlgebraError> {
        let syms = p.symbols();
        if syms.iter().any(|s| s != var) {
            return Err(AlgebraError::NotUnivariate(syms.len()));
        }
        let coeffs = p.coeffs_in(var).into_iter().map(|c| c.constant_term()).collect();
        Ok(UPoly::new(var.clone(), coeffs))
    }

    /// The unique symbol of `p` (or the ratio symbol `a` for constants).
    pub fn from_poly_auto(p: &Poly) -> Result<Self, AlgebraError> {
        let syms = p.symbols();
        match syms.len() {
            0 => UPoly::from_poly(p, &super::jet::sym::a()),
            1 => UPoly::from_poly(p, syms.iter().next().unwrap()),
            n => Err(AlgebraError::NotUnivariate(n)),
        }
    }

    pub fn to_poly(&self) -> Poly {
        Poly::from_terms(self.coeffs.iter().enumerate().map(|(k, c)| {
            (Monomial::from_factors([(self.var.clone(), k as u32)]), c.clone())
        }))
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; −1 encodes the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn lead(&self) -> Rat {
        self.coeffs.last().cloned().unwrap_or_else(Rat::zero)
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c.to_f64())
    }

    pub fn derivative(&self) -> UPoly {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * &Rat::from_int(k as i64))
            .collect();
        UPoly::new(self.var.clone(), coeffs)
    }

    fn sub(&self, other: &UPoly) -> UPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|k| {
                let a = self.coeffs.get(k).cloned().unwrap_or_else(Rat::zero);
                let b = other.coeffs.get(k).cloned().unwrap_or_else(Rat::zero);
                a - b
            })
            .collect();
        UPoly::new(self.var.clone(), coeffs)
    }

    pub fn scale(&self, c: &Rat) -> UPoly {
        UPoly::new(self.var.clone(), self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn neg(&self) -> UPoly {
        self.scale(&Rat::from_int(-1))
    }

    /// Euclidean division: `(q, r)` with `self = q·d + r`, `deg r < deg d`.
    pub fn div_rem(&self, d: &UPoly) -> Result<(UPoly, UPoly), AlgebraError> {
        if d.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        let dl = d.lead();
        let dd = d.coeffs.len();
        let mut r = self.coeffs.clone();
        if r.len() < dd {
            return Ok((UPoly::new(self.var.clone(), vec![]), self.clone()));
        }
        let mut q = vec![Rat::zero(); r.len() - dd + 1];
        for k in (0..q.len()).rev() {
            let c = &r[k + dd - 1] / &dl;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    r[k + j] -= &(&c * dc);
                }
            }
            q[k] = c;
        }
        r.truncate(dd - 1);
        Ok((UPoly::new(self.var.clone(), q), UPoly::new(self.var.clone(), r)))
    }

    pub fn rem(&self, d: &UPoly) -> Result<UPoly, AlgebraError> {
        Ok(self.div_rem(d)?.1)
    }

    pub fn monic(&self) -> UPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.lead().recip().expect("nonzero lead"))
    }

    /// Integer-coefficient primitive form with positive leading coefficient.
    pub fn primitive(&self) -> UPoly {
        let (_, p) = self.to_poly().primitive();
        UPoly::from_poly(&p, &self.var).expect("same variable")
    }

    /// Monic greatest common divisor (zero iff both inputs are zero).
    pub fn gcd(&self, other: &UPoly) -> UPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Exact quotient if `d` divides `self`.
    pub fn div_exact(&self, d: &UPoly) -> Option<UPoly> {
        let (q, r) = self.div_rem(d).ok()?;
        r.is_zero().then_some(q)
    }

    /// Square-free part `p / gcd(p, p')` (monic).
    pub fn squarefree(&self) -> UPoly {
        let g = self.gcd(&self.derivative());
        self.div_exact(&g).expect("gcd divides").monic()
    }

    /// Yun's square-free decomposition: `p = c · Π f_i^i`; entry `i−1` is
    /// `f_i` (monic, possibly constant 1).
    pub fn squarefree_decomposition(&self) -> Vec<UPoly> {
        let mut out = Vec::new();
        if self.degree() < 1 {
            return out;
        }
        let d = self.derivative();
        let a = self.gcd(&d);
        let mut b = self.div_exact(&a).expect("gcd divides");
        let mut c = d.div_exact(&a).expect("gcd divides");
        let mut dd = c.sub(&b.derivative());
        loop {
            let f = b.gcd(&dd);
            out.push(f.clone());
            b = b.div_exact(&f).expect("gcd divides");
            if b.degree() < 1 {
                break;
            }
            c = dd.div_exact(&f).expect("gcd divides");
            dd = c.sub(&b.derivative());
        }
        while out.last().is_some_and(|f| f.degree() < 1) {
            out.pop();
        }
        out
    }

    /// Sturm sequence `p0 = p, p1 = p', p_{k+1} = −rem(p_{k−1}, p_k)`.
    pub fn sturm_sequence(&self) -> Vec<UPoly> {
        let mut seq = vec![self.clone(), self.derivative()];
        while !seq.last().unwrap().is_zero() {
            let n = seq.len();
            let r = seq[n - 2].rem(&seq[n - 1]).expect("nonzero").neg();
            seq.push(r);
        }
        seq.pop();
        seq
    }

    /// Number of distinct real roots in the half-open interval `(lo, hi]`.
    pub fn count_roots(seq: &[UPoly], lo: &Rat, hi: &Rat) -> usize {
        let v = |x: &Rat| sign_variations(seq.iter().map(|p| p.eval(x).signum()));
        v(lo).saturating_sub(v(hi))
    }

    /// Cauchy bound: every real root lies strictly inside `(−B, B)`.
    pub fn root_bound(&self) -> Rat {
        let lead = self.lead().abs();
        let m = self
            .coeffs
            .iter()
            .take(self.coeffs.len().saturating_sub(1))
            .map(|c| c.abs() / lead.clone())
            .max()
            .unwrap_or_else(Rat::zero);
        m + Rat::one()
    }

    /// Rational roots via the rational-root test on the primitive integer
    /// form. Fails with `TooLarge` if the extreme coefficients do not fit in
    /// 64 bits (divisor enumeration would be impractical).
    pub fn rational_roots(&self) -> Result<Vec<Rat>, AlgebraError> {
        let sf = self.squarefree().primitive();
        if sf.degree() < 1 {
            return Ok(vec![]);
        }
        let mut out = Vec::new();
        let mut p = sf;
        if p.coeffs[0].is_zero() {
            out.push(Rat::zero());
            let x = UPoly::new(p.var.clone(), vec![Rat::zero(), Rat::one()]);
            p = p.div_exact(&x).expect("x divides");
        }
        if p.degree() >= 1 {
            let c0 = p.coeffs[0].numer().abs().to_u64().ok_or(AlgebraError::TooLarge)?;
            let cn = p.lead().numer().abs().to_u64().ok_or(AlgebraError::TooLarge)?;
            for num in divisors(c0) {
                for den in divisors(cn) {
                    if BigInt::from(num).gcd(&BigInt::from(den)) != BigInt::one() {
                        continue;
                    }
                    for sign in [1i64, -1] {
                        let r = Rat::new(BigInt::from(num) * sign, BigInt::from(den)).expect("den > 0");
                        if p.eval(&r).is_zero() && !out.contains(&r) {
                            out.push(r);
                        }
                    }
                }
            }
        }
        out.sort();
        Ok(out)
    }
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut i = 1u64;
    while i * i <= n {
        if n % i == 0 {
            out.push(i);
            if i != n / i {
                out.push(n / i);
            }
        }
        i += 1;
    }
    out.sort();
    out
}

fn sign_variations<I: IntoIterator<Item = i32>>(signs: I) -> usize {
    let mut last = 0;
    let mut n = 0;
    for s in signs {
        if s == 0 {
            continue;
        }
        if last != 0 && s != last {
            n += 1;
        }
        last = s;
    }
    n
}

/// One isolated real root: either an exact rational value or an open-closed
/// interval `(lo, hi]` with nonzero endpoint values containing exactly one
/// root of the square-free part.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsolatedRoot {
    pub lo: Rat,
    pub hi: Rat,
    /// Set when the root is rational and was hit exactly (`lo == hi`).
    pub exact: bool,
    pub multiplicity: u32,
}

/// Sturm-certified isolation of all real roots of a univariate polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootIsolation {
    /// Canonical text of the input polynomial.
    pub polynomial: String,
    pub roots: Vec<IsolatedRoot>,
    /// True when the input is already square-free.
    pub multiplicity_free: bool,
}

impl RootIsolation {
    /// Intervals (exact roots appear as degenerate `[r, r]`).
    pub fn intervals(&self) -> Vec<(Rat, Rat)> {
        self.roots.iter().map(|r| (r.lo.clone(), r.hi.clone())).collect()
    }

    pub fn count(&self) -> usize {
        self.roots.len()
    }

    /// Whether `x` lies in some isolating interval (closed).
    pub fn covers(&self, x: &Rat) -> bool {
        self.roots.iter().any(|r| &r.lo <= x && x <= &r.hi)
    }
}

/// Isolates the real roots of `p` (univariate, nonzero).
pub fn isolate_real_roots(p: &Poly) -> Result<RootIsolation, AlgebraError> {
    if p.is_zero() {
        return Err(AlgebraError::ZeroPolynomial);
    }
    let u = UPoly::from_poly_auto(p)?;
    let sf = u.squarefree();
    let multiplicity_free = sf.degree() == u.degree();
    let mut roots = Vec::new();
    if sf.degree() >= 1 {
        let seq = sf.sturm_sequence();
        let b = sf.root_bound();
        let mut stack = vec![(-b.clone(), b)];
        while let Some((lo, hi)) = stack.pop() {
            let n = UPoly::count_roots(&seq, &lo, &hi);
            if n == 0 {
                continue;
            }
            if n == 1 {
                if sf.eval(&hi).is_zero() {
                    roots.push(IsolatedRoot { lo: hi.clone(), hi, exact: true, multiplicity: 0 });
                    continue;
                }
                if !sf.eval(&lo).is_zero() {
                    roots.push(IsolatedRoot { lo, hi, exact: false, multiplicity: 0 });
                    continue;
                }
            }
            let mid = Rat::midpoint(&lo, &hi);
            stack.push((lo, mid.clone()));
            stack.push((mid, hi));
        }
    }
    for r in &mut roots {
        refine_root(&sf, r, &Rat::frac(1, 4));
    }
    roots.sort_by(|a, b| a.lo.cmp(&b.lo));
    // Multiplicities from Yun's decomposition: a root of factor f_i has
    // multiplicity i.
    let parts = u.squarefree_decomposition();
    for r in &mut roots {
        for (i, f) in parts.iter().enumerate() {
            if f.degree() < 1 {
                continue;
            }
            let hit = if r.exact {
                f.eval(&r.lo).is_zero()
            } else {
                UPoly::count_roots(&f.sturm_sequence(), &r.lo, &r.hi) == 1
            };
            if hit {
                r.multiplicity = i as u32 + 1;
                break;
            }
        }
    }
    Ok(RootIsolation { polynomial: p.to_string(), roots, multiplicity_free })
}

/// Bisects an isolating interval of the square-free `sf` until its width is
/// at most `width` (or the root is hit exactly).
pub fn refine_root(sf: &UPoly, r: &mut IsolatedRoot, width: &Rat) {
    while !r.exact && &(&r.hi - &r.lo) > width {
        let mid = Rat::midpoint(&r.lo, &r.hi);
        let vm = sf.eval(&mid);
        if vm.is_zero() {
            r.lo = mid.clone();
            r.hi = mid;
            r.exact = true;
        } else if vm.signum() == sf.eval(&r.hi).signum() {
            r.hi = mid;
        } else {
            r.lo = mid;
        }
    }
}

/// Convenience: `p(x0)` for a polynomial in one symbol.
pub fn eval_rational(p: &Poly, x0: &Rat) -> Result<Rat, AlgebraError> {
    p.eval_rational(x0)
}

/// Univariate gcd of polynomials in the same single symbol, returned as a
/// primitive integer polynomial.
pub fn gcd_poly(p: &Poly, q: &Poly) -> Result<Poly, AlgebraError> {
    let var = p.symbols().into_iter().chain(q.symbols()).next().unwrap_or_else(super::jet::sym::a);
    let a = UPoly::from_poly(p, &var)?;
    let b = UPoly::from_poly(q, &var)?;
    let g = a.gcd(&b);
    Ok(g.to_poly().primitive().1)
}
