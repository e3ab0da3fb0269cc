//! Binary fixed-point arithmetic on big integers.
//!
//! Used as an extended-precision reference for the cosine-moment kernels,
//! whose power series has terms as large as `e^{2π|x|}` and whose closed
//! form cancels catastrophically near `x = 0`. A value `v` represents
//! `v · 2^{−bits}`.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::exactalg::Rational;

/// Precision context: number of fractional bits plus a cached `π`.
#[derive(Clone, Debug)]
pub struct Fixed {
    bits: usize,
    pi: BigInt,
}

impl Fixed {
    /// A context with `bits` fractional bits.
    pub fn new(bits: usize) -> Self {
        let mut ctx = Fixed { bits, pi: BigInt::zero() };
        ctx.pi = ctx.compute_pi();
        ctx
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn one(&self) -> BigInt {
        BigInt::one() << self.bits
    }

    pub fn pi(&self) -> &BigInt {
        &self.pi
    }

    /// Exact conversion of a finite `f64` (rounded only below `2^{−bits}`).
    pub fn from_f64(&self, x: f64) -> BigInt {
        assert!(x.is_finite());
        if x == 0.0 {
            return BigInt::zero();
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
        let m = BigInt::from(mant) * sign;
        let shift = e + self.bits as i64;
        if shift >= 0 {
            m << shift as usize
        } else {
            round_shift(&m, (-shift) as usize)
        }
    }

    /// Nearest fixed-point value to a rational.
    pub fn from_rational(&self, q: &Rational) -> BigInt {
        self.div_round(&(q.numer() << self.bits), q.denom())
    }

    pub fn from_int(&self, n: i64) -> BigInt {
        BigInt::from(n) << self.bits
    }

    /// Product of two fixed-point values.
    pub fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        round_shift(&(a * b), self.bits)
    }

    /// Quotient of two fixed-point values.
    pub fn div(&self, a: &BigInt, b: &BigInt) -> BigInt {
        self.div_round(&(a << self.bits), b)
    }

    fn div_round(&self, n: &BigInt, d: &BigInt) -> BigInt {
        let (q, r) = n.div_mod_floor(d);
        // Round half up on |r|/d >= 1/2 with d > 0 or d < 0 handled by sign.
        let twice = r.abs() * 2;
        if twice >= d.abs() {
            if d.is_positive() { q + 1 } else { q - 1 }
        } else {
            q
        }
    }

    /// `a^k` for signed `k`.
    pub fn powi(&self, a: &BigInt, k: i32) -> BigInt {
        let mut acc = self.one();
        for _ in 0..k.unsigned_abs() {
            acc = self.mul(&acc, a);
        }
        if k < 0 {
            self.div(&self.one(), &acc)
        } else {
            acc
        }
    }

    /// Nearest `f64`.
    pub fn to_f64(&self, a: &BigInt) -> f64 {
        if a.is_zero() {
            return 0.0;
        }
        let nbits = a.bits() as i64;
        let drop = (nbits - 64).max(0);
        let top = (a.abs() >> drop as usize).to_u64().unwrap_or(u64::MAX) as f64;
        let v = top * 2f64.powi((drop - self.bits as i64) as i32);
        if a.sign() == Sign::Minus {
            -v
        } else {
            v
        }
    }

    fn compute_pi(&self) -> BigInt {
        // Machin: π = 16 atan(1/5) − 4 atan(1/239), computed with guard bits.
        let guard = 32;
        let wide = Fixed { bits: self.bits + guard, pi: BigInt::zero() };
        let a = wide.atan_inv(5) * 16 - wide.atan_inv(239) * 4;
        round_shift(&a, guard)
    }

    fn atan_inv(&self, k: u64) -> BigInt {
        let mut power = self.one() / k;
        let k2 = BigInt::from(k * k);
        let mut sum = BigInt::zero();
        let mut n = 0u64;
        while !power.is_zero() {
            let term = &power / (2 * n + 1);
            if n.is_multiple_of(2) {
                sum += term;
            } else {
                sum -= term;
            }
            power /= &k2;
            n += 1;
        }
        sum
    }

    /// `(cos y, sin y)` for a fixed-point `y` with `|y| ≤ 4`.
    pub fn cos_sin_small(&self, y: &BigInt) -> (BigInt, BigInt) {
        let y2 = self.mul(y, y);
        let mut term = self.one();
        let mut cos = BigInt::zero();
        let mut k = 0u64;
        while !term.is_zero() {
            if (k / 2).is_multiple_of(2) {
                cos += &term;
            } else {
                cos -= &term;
            }
            term = self.mul(&term, &y2) / ((k + 1) * (k + 2));
            k += 2;
        }
        let mut term = y.clone();
        let mut sin = BigInt::zero();
        let mut k = 1u64;
        while !term.is_zero() {
            if (k / 2).is_multiple_of(2) {
                sin += &term;
            } else {
                sin -= &term;
            }
            term = self.mul(&term, &y2) / ((k + 1) * (k + 2));
            k += 2;
        }
        (cos, sin)
    }

    /// `(cos 2πx, sin 2πx)` for a fixed-point `x`, reduced exactly modulo 1.
    pub fn cos_sin_2pi(&self, x: &BigInt) -> (BigInt, BigInt) {
        let one = self.one();
        let mut f = x.mod_floor(&one);
        if f.clone() * 2 > one {
            f -= &one;
        }
        let y = self.mul(&(self.pi.clone() * 2), &f);
        self.cos_sin_small(&y)
    }
}

fn round_shift(a: &BigInt, s: usize) -> BigInt {
    if s == 0 {
        return a.clone();
    }
    let half = BigInt::one() << (s - 1);
    (a + half) >> s
}
