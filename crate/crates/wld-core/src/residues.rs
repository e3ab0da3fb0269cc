//! Residue coefficients `b_r(j)` by exact Cauchy coefficient extraction.
//!
//! `b_r(j)` is `(−1)^{r(r−1)/2} 2^r / r!` times the coefficient of
//! `z_1^{2r−2}⋯z_r^{2r−2}` in `Δ(z²)Δ(z)(z_1^j+⋯+z_r^j)e^{z_1+⋯+z_r}`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::exactalg::{factorial, vandermonde, Rational, TruncPoly};

/// Largest `r` accepted without an explicit override.
pub const DEFAULT_MAX_R: u32 = 8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ResidueError {
    #[error("r must be at least 1")]
    ZeroR,
    #[error("r = {r} exceeds the default limit {limit}; pass an explicit override")]
    RTooLarge { r: u32, limit: u32 },
}

/// Exact table `j ↦ b_r(j)` for `0 ≤ j ≤ 2r−2`.
#[derive(Clone, Debug, PartialEq)]
pub struct BTable {
    pub r: u32,
    pub values: BTreeMap<u32, Rational>,
}

impl BTable {
    /// `b_r(j)`, zero outside the stored range.
    pub fn get(&self, j: u32) -> Rational {
        self.values.get(&j).cloned().unwrap_or_else(Rational::zero)
    }

    /// `g_r(1) = b_r(0)/r`.
    pub fn g_r1(&self) -> Rational {
        self.get(0) / Rational::from_integer(BigInt::from(self.r))
    }

    /// Largest `j` that can carry a nonzero value.
    pub fn support_bound(r: u32) -> u32 {
        (2 * r - 2).min(r * (r - 1) / 2)
    }
}

fn check_r(r: u32, limit: u32) -> Result<(), ResidueError> {
    if r == 0 {
        return Err(ResidueError::ZeroR);
    }
    if r > limit {
        return Err(ResidueError::RTooLarge { r, limit });
    }
    Ok(())
}

/// `(−1)^{r(r−1)/2} 2^r / r!`.
pub fn prefactor(r: u32) -> Rational {
    let sign = if (r * (r.saturating_sub(1)) / 2).is_multiple_of(2) { 1 } else { -1 };
    Rational::new(BigInt::from(sign) * (BigInt::one() << r as usize), factorial(r))
}

fn cap(r: u32) -> u16 {
    (2 * r - 2) as u16
}

/// `Δ(z²)Δ(z)` in `r` variables truncated at `2r−2`.
pub fn double_vandermonde(r: u32) -> TruncPoly {
    let n = r as usize;
    let vars: Vec<usize> = (0..n).collect();
    let c = cap(r);
    &vandermonde(n, c, &vars, 2) * &vandermonde(n, c, &vars, 1)
}

fn corner(r: u32) -> Vec<u16> {
    vec![cap(r); r as usize]
}

/// Extraction with `z_var^j` in place of the power sum.
fn extract_single(base: &TruncPoly, r: u32, var: usize, j: u32) -> Rational {
    let n = r as usize;
    let c = cap(r);
    if j > c as u32 {
        return Rational::zero();
    }
    let mut e = vec![0u16; n];
    e[var] = j as u16;
    let mono = TruncPoly::monomial(n, c, &e, Rational::one());
    (base * &mono).coefficient_times_exp(&corner(r))
}

/// Extraction with `Σ_i z_i^j`, the definition proper.
fn extract_power_sum(base: &TruncPoly, r: u32, j: u32) -> Rational {
    let n = r as usize;
    let c = cap(r);
    if j > c as u32 {
        return Rational::zero();
    }
    let mut sum = TruncPoly::zero(n, c);
    for v in 0..n {
        let mut e = vec![0u16; n];
        e[v] = j as u16;
        sum = &sum + &TruncPoly::monomial(n, c, &e, Rational::one());
    }
    (base * &sum).coefficient_times_exp(&corner(r))
}

/// `b_r(j)` with the default `r ≤ 8` guard.
pub fn b_coefficient(r: u32, j: u32) -> Result<Rational, ResidueError> {
    b_coefficient_with_limit(r, j, DEFAULT_MAX_R)
}

/// `b_r(j)` with a caller-chosen ceiling on `r`.
pub fn b_coefficient_with_limit(r: u32, j: u32, limit: u32) -> Result<Rational, ResidueError> {
    check_r(r, limit)?;
    let base = double_vandermonde(r);
    Ok(prefactor(r) * extract_power_sum(&base, r, j))
}

/// `b_r(j)` computed as `r` times the extraction with `z_1^j` alone.
///
/// Equal to [`b_coefficient`] because the rest of the integrand is symmetric.
pub fn b_coefficient_symmetrized(r: u32, j: u32) -> Result<Rational, ResidueError> {
    check_r(r, DEFAULT_MAX_R)?;
    let base = double_vandermonde(r);
    let rr = Rational::from_integer(BigInt::from(r));
    Ok(prefactor(r) * rr * extract_single(&base, r, 0, j))
}

/// `b_r(j)` with the power sum replaced by `z_var^j` (no factor `r`).
pub fn b_single_variable(r: u32, var: usize, j: u32) -> Result<Rational, ResidueError> {
    check_r(r, DEFAULT_MAX_R)?;
    assert!(var < r as usize, "variable index out of range");
    let base = double_vandermonde(r);
    Ok(prefactor(r) * extract_single(&base, r, var, j))
}

/// All `b_r(j)` for `0 ≤ j ≤ 2r−2`.
pub fn b_table(r: u32) -> Result<BTable, ResidueError> {
    b_table_with_limit(r, DEFAULT_MAX_R)
}

/// [`b_table`] with a caller-chosen ceiling on `r`.
pub fn b_table_with_limit(r: u32, limit: u32) -> Result<BTable, ResidueError> {
    check_r(r, limit)?;
    let base = double_vandermonde(r);
    let pre = prefactor(r);
    let values = (0..=2 * r - 2)
        .map(|j| (j, &pre * extract_power_sum(&base, r, j)))
        .collect();
    Ok(BTable { r, values })
}

/// Zero test of the extraction with `z^α` in place of the power sum.
///
/// Returns the literal result of the test, whether or not `Σα` exceeds
/// `r(r−1)/2`.
pub fn vanishing_check(r: u32, alpha: &[u32]) -> Result<bool, ResidueError> {
    check_r(r, DEFAULT_MAX_R)?;
    assert_eq!(alpha.len(), r as usize, "alpha must have r entries");
    let c = cap(r);
    if alpha.iter().any(|&a| a > c as u32) {
        return Ok(true);
    }
    let e: Vec<u16> = alpha.iter().map(|&a| a as u16).collect();
    let mono = TruncPoly::monomial(r as usize, c, &e, Rational::one());
    let base = double_vandermonde(r);
    Ok((&base * &mono).coefficient_times_exp(&corner(r)).is_zero())
}
