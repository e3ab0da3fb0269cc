//! Prime sums against test functions over `ℚ`: a segmented sieve, the
//! weighted partial sums `Σ_p (log p)ⁿ/p·Φ̂(log p/log R)`, and the limiting
//! one-level densities written through moments of `Φ̂`.

use thiserror::Error;

use crate::kernels::{TestFamily, TestFunctionPair};
use crate::quad::NeumaierSum;

/// Largest sieve bound accepted without an override.
pub const SIEVE_BUDGET: u64 = 1_000_000_000;
const SEGMENT: u64 = 1 << 18;

#[derive(Debug, Error, PartialEq)]
pub enum PrimeError {
    #[error("sieve limit must be at least 2, got {0}")]
    LimitTooSmall(u64),
    #[error("sieve limit {0} exceeds the memory budget of 1e9")]
    OverBudget(u64),
    #[error("primes up to {needed:.6e} are needed but the table stops at {limit}")]
    InsufficientBound { limit: u64, needed: f64 },
    #[error("n must be positive")]
    ZeroN,
    #[error("R must exceed 1, got {0}")]
    BadR(f64),
    #[error("explicit formula is available for r in 1..=3, got {0}")]
    UnsupportedR(u32),
    #[error("support radius {delta} exceeds the window {alpha} for r = {r}")]
    OutsideWindow { r: u32, delta: f64, alpha: f64 },
}

/// All primes up to `limit`, ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimeTable {
    pub limit: u64,
    pub primes: Vec<u64>,
}

impl PrimeTable {
    /// `π(x)` for `x ≤ limit`.
    pub fn count_upto(&self, x: u64) -> usize {
        self.primes.partition_point(|&p| p <= x)
    }
}

fn simple_sieve(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut comp = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !comp[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                comp[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Segmented sieve of Eratosthenes.
pub fn sieve(limit: u64) -> Result<PrimeTable, PrimeError> {
    if limit < 2 {
        return Err(PrimeError::LimitTooSmall(limit));
    }
    if limit > SIEVE_BUDGET {
        return Err(PrimeError::OverBudget(limit));
    }
    let root = (limit as f64).sqrt() as u64 + 1;
    let base = simple_sieve(root);
    let mut primes: Vec<u64> = base.iter().copied().filter(|&p| p <= limit).collect();
    let mut lo = root + 1;
    let mut seg = vec![false; SEGMENT as usize];
    while lo <= limit {
        let hi = (lo + SEGMENT - 1).min(limit);
        let len = (hi - lo + 1) as usize;
        seg[..len].fill(false);
        for &p in &base {
            if p * p > hi {
                break;
            }
            let mut m = lo.div_ceil(p) * p;
            while m <= hi {
                seg[(m - lo) as usize] = true;
                m += p;
            }
        }
        primes.extend((0..len).filter(|&i| !seg[i]).map(|i| lo + i as u64));
        lo = hi + 1;
    }
    Ok(PrimeTable { limit, primes })
}

/// Both sides of the prime-sum asymptotic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrimeSum {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_error: f64,
}

/// `lhs = (1/log R)·Σ_p (log p)ⁿ/p·Φ̂(log p/log R)` against
/// `rhs = (log R)^{n−1}·∫₀^∞ Φ̂(u)u^{n−1} du`.
pub fn lemma41_partial_sum(
    n: u32,
    big_r: f64,
    pair: &TestFunctionPair,
    table: &PrimeTable,
) -> Result<PrimeSum, PrimeError> {
    if n == 0 {
        return Err(PrimeError::ZeroN);
    }
    if big_r.is_nan() || big_r <= 1.0 {
        return Err(PrimeError::BadR(big_r));
    }
    let log_r = big_r.ln();
    let needed = (pair.delta * log_r).exp();
    // Primes at exactly R^δ carry Φ̂ = 0, so a bound equal up to rounding suffices.
    if (table.limit as f64) < needed * (1.0 - 1e-12) {
        return Err(PrimeError::InsufficientBound { limit: table.limit, needed });
    }
    let mut acc = NeumaierSum::default();
    if pair.family != TestFamily::Zero {
        for &p in &table.primes {
            let lp = (p as f64).ln();
            let u = lp / log_r;
            if u >= pair.delta {
                break;
            }
            acc.add(lp.powi(n as i32) / p as f64 * pair.phi_hat(u));
        }
    }
    let lhs = acc.total() / log_r;
    let rhs = log_r.powi(n as i32 - 1) * pair.hat_moment(n - 1);
    let rel_error = if rhs == 0.0 { (lhs - rhs).abs() } else { (lhs - rhs).abs() / rhs.abs() };
    Ok(PrimeSum { lhs, rhs, rel_error })
}

/// Support window `α_r`: `1/2` for `r = 1, 3` and `1/4` for `r = 2`.
pub fn support_window(r: u32) -> Result<f64, PrimeError> {
    match r {
        1 | 3 => Ok(0.5),
        2 => Ok(0.25),
        _ => Err(PrimeError::UnsupportedR(r)),
    }
}

/// Limiting weighted one-level density as `Φ̂(0) + c_r·Φ(0) + Σ` moments of `Φ̂`:
///
/// * `r = 1`: `Φ̂(0) − ½Φ(0)`
/// * `r = 2`: `Φ̂(0) − (3/2)Φ(0) + 4∫₀^∞Φ̂(u)u du`
/// * `r = 3`: `Φ̂(0) − (5/2)Φ(0) + 12∫₀^∞Φ̂(u)u du − 8∫₀^∞Φ̂(u)u³ du`
///
/// The support of `Φ̂` may reach the window edge since the Fejér `Φ̂` vanishes there.
pub fn explicit_formula_rhs(r: u32, pair: &TestFunctionPair) -> Result<f64, PrimeError> {
    let alpha = support_window(r)?;
    if pair.delta > alpha {
        return Err(PrimeError::OutsideWindow { r, delta: pair.delta, alpha });
    }
    let base = pair.phi_hat(0.0);
    let phi0 = pair.phi(0.0);
    Ok(match r {
        1 => base - 0.5 * phi0,
        2 => base - 1.5 * phi0 + 4.0 * pair.hat_moment(1),
        _ => base - 2.5 * phi0 + 12.0 * pair.hat_moment(1) - 8.0 * pair.hat_moment(3),
    })
}
