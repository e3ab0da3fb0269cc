//! Exact rational arithmetic and truncated multivariate polynomials.
//!
//! `TruncPoly` keeps every exponent at or below a per-variable cap. Products
//! that would exceed the cap in any variable are dropped on the spot, which is
//! what makes coefficient extraction of `Δ(z²)Δ(z)e^{Σz}` tractable.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Arbitrary-precision fraction, always in lowest terms with positive denominator.
pub type Rational = BigRational;

/// Builds `n/d` as a reduced rational.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Builds the integer `n` as a rational.
pub fn rint(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n!` as a big integer.
pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Binomial coefficient `C(n, k)`; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `x^e` for a rational base and signed exponent. Panics on `0^negative`.
pub fn rpow(x: &Rational, e: i64) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..e.unsigned_abs() {
        acc *= x;
    }
    if e < 0 {
        acc.recip()
    } else {
        acc
    }
}

/// Lossy conversion of an exact rational to the nearest-ish `f64`.
///
/// Numerator and denominator are shifted so both fit comfortably in an
/// `f64` before dividing; the result carries at most a couple of ulps error.
pub fn to_f64(x: &Rational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let n = x.numer();
    let d = x.denom();
    let nb = n.bits() as i64;
    let db = d.bits() as i64;
    let ns = (nb - 60).max(0);
    let ds = (db - 60).max(0);
    let nf = big_to_f64(&(n.abs() >> ns as usize));
    let df = big_to_f64(&(d >> ds as usize));
    let v = (nf / df) * 2f64.powi((ns - ds) as i32);
    if n.is_negative() {
        -v
    } else {
        v
    }
}

fn big_to_f64(x: &BigInt) -> f64 {
    // Small enough to be exact in a u64 after the shift in `to_f64`.
    let (_, digits) = x.to_u64_digits();
    let mut v = 0.0f64;
    for &d in digits.iter().rev() {
        v = v * 18446744073709551616.0 + d as f64;
    }
    v
}

/// Exponent vector of a monomial. Entries never exceed the owning polynomial's cap.
pub type Exponents = Vec<u16>;

/// Multivariate polynomial over `Rational` truncated per variable at `cap`.
#[derive(Clone, PartialEq)]
pub struct TruncPoly {
    nvars: usize,
    cap: u16,
    terms: HashMap<Exponents, Rational>,
}

impl fmt::Debug for TruncPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut keys: Vec<_> = self.terms.keys().collect();
        keys.sort();
        let mut list = f.debug_map();
        for k in keys {
            list.entry(k, &self.terms[k].to_string());
        }
        list.finish()
    }
}

impl TruncPoly {
    /// The zero polynomial in `nvars` variables.
    pub fn zero(nvars: usize, cap: u16) -> Self {
        TruncPoly { nvars, cap, terms: HashMap::new() }
    }

    /// The constant `c`.
    pub fn constant(nvars: usize, cap: u16, c: Rational) -> Self {
        let mut p = Self::zero(nvars, cap);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The constant 1.
    pub fn one(nvars: usize, cap: u16) -> Self {
        Self::constant(nvars, cap, Rational::one())
    }

    /// The single monomial `c·z^exps`, or zero if it exceeds the cap.
    pub fn monomial(nvars: usize, cap: u16, exps: &[u16], c: Rational) -> Self {
        assert_eq!(exps.len(), nvars, "exponent vector length must equal nvars");
        let mut p = Self::zero(nvars, cap);
        p.add_term(exps.to_vec(), c);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn cap(&self) -> u16 {
        self.cap
    }

    /// Number of stored (nonzero) terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterates over `(exponents, coefficient)` pairs in unspecified order.
    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Rational)> {
        self.terms.iter()
    }

    fn add_term(&mut self, exps: Exponents, c: Rational) {
        if c.is_zero() || exps.iter().any(|&e| e > self.cap) {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::hash_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            std::collections::hash_map::Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    /// Exact coefficient of `z^exps`; zero when absent.
    pub fn coefficient(&self, exps: &[u16]) -> Rational {
        self.terms.get(exps).cloned().unwrap_or_else(Rational::zero)
    }

    /// Coefficient of `z^target` in `self · e^{z_1+…+z_r}` without forming the product.
    ///
    /// Each variable of the exponential contributes `1/(t_i − a_i)!`.
    pub fn coefficient_times_exp(&self, target: &[u16]) -> Rational {
        assert_eq!(target.len(), self.nvars);
        let maxt = target.iter().copied().max().unwrap_or(0) as u32;
        let inv_fact: Vec<Rational> = (0..=maxt)
            .map(|k| Rational::new(BigInt::one(), factorial(k)))
            .collect();
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            if e.iter().zip(target).any(|(a, t)| a > t) {
                continue;
            }
            let mut term = c.clone();
            for (a, t) in e.iter().zip(target) {
                term *= &inv_fact[(t - a) as usize];
            }
            acc += term;
        }
        acc
    }

    /// Swaps variables `i` and `j`.
    pub fn swap_vars(&self, i: usize, j: usize) -> Self {
        let mut out = Self::zero(self.nvars, self.cap);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2.swap(i, j);
            out.terms.insert(e2, c.clone());
        }
        out
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars, self.cap);
        }
        let terms = self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect();
        TruncPoly { nvars: self.nvars, cap: self.cap, terms }
    }

    fn check_compat(&self, other: &Self) {
        assert_eq!(self.nvars, other.nvars, "variable counts differ");
        assert_eq!(self.cap, other.cap, "caps differ");
    }
}

impl Add for &TruncPoly {
    type Output = TruncPoly;
    fn add(self, rhs: &TruncPoly) -> TruncPoly {
        self.check_compat(rhs);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &TruncPoly {
    type Output = TruncPoly;
    fn sub(self, rhs: &TruncPoly) -> TruncPoly {
        self + &(-rhs)
    }
}

impl Neg for &TruncPoly {
    type Output = TruncPoly;
    fn neg(self) -> TruncPoly {
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect();
        TruncPoly { nvars: self.nvars, cap: self.cap, terms }
    }
}

impl Mul for &TruncPoly {
    type Output = TruncPoly;
    fn mul(self, rhs: &TruncPoly) -> TruncPoly {
        self.check_compat(rhs);
        let mut out = TruncPoly::zero(self.nvars, self.cap);
        for (ea, ca) in &self.terms {
            'inner: for (eb, cb) in &rhs.terms {
                let mut e = Vec::with_capacity(self.nvars);
                for (a, b) in ea.iter().zip(eb) {
                    let s = a + b;
                    if s > self.cap {
                        continue 'inner;
                    }
                    e.push(s);
                }
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

/// `Π_{i<j} (z_j^power − z_i^power)` over the listed variables.
///
/// An empty or single-variable list yields the constant 1.
pub fn vandermonde(nvars: usize, cap: u16, vars: &[usize], power: u16) -> TruncPoly {
    assert!(power >= 1, "power must be positive");
    let mut acc = TruncPoly::one(nvars, cap);
    for (a, &i) in vars.iter().enumerate() {
        for &j in &vars[a + 1..] {
            let mut ej = vec![0u16; nvars];
            ej[j] = power;
            let mut ei = vec![0u16; nvars];
            ei[i] = power;
            let mut factor = TruncPoly::zero(nvars, cap);
            factor.add_term(ej, Rational::one());
            factor.add_term(ei, -Rational::one());
            acc = &acc * &factor;
        }
    }
    acc
}

/// `Σ_{m=0}^{cap} z_var^m / m!`.
pub fn truncated_exp(nvars: usize, cap: u16, var: usize) -> TruncPoly {
    assert!(var < nvars, "variable index out of range");
    let mut p = TruncPoly::zero(nvars, cap);
    for m in 0..=cap {
        let mut e = vec![0u16; nvars];
        e[var] = m;
        p.add_term(e, Rational::new(BigInt::one(), factorial(m as u32)));
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vandermonde_small_cases() {
        let one = vandermonde(1, 4, &[0], 1);
        assert_eq!(one, TruncPoly::one(1, 4));

        let d1 = vandermonde(2, 4, &[0, 1], 1);
        assert_eq!(d1.coefficient(&[0, 1]), rint(1));
        assert_eq!(d1.coefficient(&[1, 0]), rint(-1));
        assert_eq!(d1.len(), 2);

        let d2 = vandermonde(2, 4, &[0, 1], 2);
        assert_eq!(d2.coefficient(&[0, 2]), rint(1));
        assert_eq!(d2.coefficient(&[2, 0]), rint(-1));
    }

    #[test]
    fn truncated_exp_coefficients() {
        assert_eq!(truncated_exp(1, 0, 0), TruncPoly::one(1, 0));
        let e2 = truncated_exp(1, 2, 0);
        assert_eq!(e2.coefficient(&[2]), rat(1, 2));
        assert_eq!(e2.len(), 3);
        assert_eq!(truncated_exp(1, 3, 0).coefficient(&[3]), rat(1, 6));
        assert_eq!(truncated_exp(1, 4, 0).coefficient(&[3]), rat(1, 6));
    }

    #[test]
    fn product_of_two_vandermondes() {
        let p = &vandermonde(2, 6, &[0, 1], 2) * &vandermonde(2, 6, &[0, 1], 1);
        // (z2² − z1²)(z2 − z1) = z2³ − z1 z2² − z1² z2 + z1³
        assert_eq!(p.coefficient(&[2, 1]), rint(-1));
        assert_eq!(p.coefficient(&[1, 2]), rint(-1));
        assert_eq!(p.coefficient(&[3, 0]), rint(1));
        assert_eq!(p.coefficient(&[0, 3]), rint(1));
        assert_eq!(p.len(), 4);
    }

    #[test]
    fn truncation_drops_high_terms() {
        let x = TruncPoly::monomial(1, 3, &[2], rint(1));
        let sq = &x * &x;
        assert!(sq.is_empty());
    }

    #[test]
    fn exp_pairing_matches_full_product() {
        let cap = 4;
        let p = &vandermonde(3, cap, &[0, 1, 2], 2) * &vandermonde(3, cap, &[0, 1, 2], 1);
        let mut full = p.clone();
        for v in 0..3 {
            full = &full * &truncated_exp(3, cap, v);
        }
        assert_eq!(full.coefficient(&[4, 4, 4]), p.coefficient_times_exp(&[4, 4, 4]));
        assert_eq!(full.coefficient(&[3, 4, 2]), p.coefficient_times_exp(&[3, 4, 2]));
    }

    #[test]
    fn to_f64_handles_huge_parts() {
        let big = Rational::new(factorial(60), factorial(59));
        assert_eq!(to_f64(&big), 60.0);
        assert_eq!(to_f64(&rat(-3, 4)), -0.75);
        let tiny = Rational::new(BigInt::one(), factorial(40));
        let expect = 1.0 / (1..=40).map(|k| k as f64).product::<f64>();
        assert!((to_f64(&tiny) / expect - 1.0).abs() < 1e-15);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(2, 5), BigInt::zero());
        assert_eq!(binomial(0, 0), BigInt::one());
    }
}
