//! Tails `∫_T^∞ x^{−m}·cos(ωx)` and `∫_T^∞ x^{−m}·sin(ωx)` with certified remainders.
//!
//! For `ω > 0` repeated integration by parts gives
//! `∫_T^∞ x^{−m}e^{iωx} dx = −e^{iωT} Σ_{k<K} (m)_k T^{−m−k}/(iω)^{k+1} + R_K`
//! with `|R_K| ≤ (m)_K ω^{−K} T^{1−m−K}/(m+K−1)`.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Cos,
    Sin,
}

/// `coef · x^{−m} · phase(ω x)`; with `ω = 0` and `Cos` this is a plain power.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wave {
    pub coef: f64,
    pub m: u32,
    pub omega: f64,
    pub phase: Phase,
}

#[derive(Debug, Error, PartialEq)]
pub enum TailError {
    #[error("non-oscillating term x^-{m} is not integrable at infinity")]
    Divergent { m: u32 },
    #[error("asymptotic tail did not reach the requested accuracy (bound {bound:e})")]
    Inaccurate { bound: f64 },
}

/// Tail value and a bound on its truncation error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tail {
    pub value: f64,
    pub bound: f64,
}

const MAX_TERMS: u32 = 200;

/// `∫_T^∞` of one wave, `T > 0`.
pub fn wave_tail(w: &Wave, t: f64, tol: f64) -> Result<Tail, TailError> {
    assert!(t > 0.0);
    if w.coef == 0.0 {
        return Ok(Tail { value: 0.0, bound: 0.0 });
    }
    if w.omega == 0.0 {
        return match w.phase {
            Phase::Sin => Ok(Tail { value: 0.0, bound: 0.0 }),
            Phase::Cos if w.m >= 2 => {
                Ok(Tail { value: w.coef * t.powi(1 - w.m as i32) / (w.m - 1) as f64, bound: 0.0 })
            }
            Phase::Cos => Err(TailError::Divergent { m: w.m }),
        };
    }
    let omega = w.omega.abs();
    let sign = if w.omega < 0.0 && w.phase == Phase::Sin { -1.0 } else { 1.0 };
    let m = w.m as f64;
    let i_omega = Complex64::new(0.0, omega);
    let mut sum = Complex64::new(0.0, 0.0);
    // term_k = (m)_k T^{−m−k} / (iω)^{k+1}
    let mut term = t.powf(-m) / i_omega;
    let mut rising = 1.0f64;
    let mut bound = f64::INFINITY;
    for k in 0..MAX_TERMS {
        sum += term;
        let kk = k as f64 + 1.0;
        rising *= m + k as f64;
        let rem = w.coef.abs() * rising / omega.powf(kk) * t.powf(1.0 - m - kk) / (m + kk - 1.0);
        if rem <= tol {
            bound = rem;
            break;
        }
        if rem > bound {
            // The asymptotic series started to diverge.
            break;
        }
        bound = rem;
        term = term * (m + k as f64) / (t * i_omega);
    }
    if bound > tol {
        return Err(TailError::Inaccurate { bound });
    }
    let full = -Complex64::from_polar(1.0, omega * t) * sum;
    let v = match w.phase {
        Phase::Cos => full.re,
        Phase::Sin => full.im,
    };
    Ok(Tail { value: sign * w.coef * v, bound })
}

/// Sum of [`wave_tail`] over a list.
pub fn tail_sum(waves: &[Wave], t: f64, tol_each: f64) -> Result<Tail, TailError> {
    let mut value = 0.0;
    let mut bound = 0.0;
    for w in waves {
        let r = wave_tail(w, t, tol_each)?;
        value += r.value;
        bound += r.bound;
    }
    Ok(Tail { value, bound })
}

/// Pointwise product of two wave sums, expanded with product-to-sum identities.
pub fn multiply(a: &[Wave], b: &[Wave]) -> Vec<Wave> {
    let mut out = Vec::with_capacity(2 * a.len() * b.len());
    for x in a {
        for y in b {
            let c = 0.5 * x.coef * y.coef;
            let m = x.m + y.m;
            let (d, s) = (x.omega - y.omega, x.omega + y.omega);
            let pair = match (x.phase, y.phase) {
                // cos a cos b = ½[cos(a−b) + cos(a+b)]
                (Phase::Cos, Phase::Cos) => [(c, d, Phase::Cos), (c, s, Phase::Cos)],
                // sin a sin b = ½[cos(a−b) − cos(a+b)]
                (Phase::Sin, Phase::Sin) => [(c, d, Phase::Cos), (-c, s, Phase::Cos)],
                // sin a cos b = ½[sin(a+b) + sin(a−b)]
                (Phase::Sin, Phase::Cos) => [(c, s, Phase::Sin), (c, d, Phase::Sin)],
                // cos a sin b = ½[sin(a+b) − sin(a−b)]
                (Phase::Cos, Phase::Sin) => [(c, s, Phase::Sin), (-c, d, Phase::Sin)],
            };
            for (coef, omega, phase) in pair {
                out.push(normalize(Wave { coef, m, omega, phase }));
            }
        }
    }
    out
}

fn normalize(w: Wave) -> Wave {
    if w.omega < 0.0 {
        match w.phase {
            Phase::Cos => Wave { omega: -w.omega, ..w },
            Phase::Sin => Wave { omega: -w.omega, coef: -w.coef, ..w },
        }
    } else {
        w
    }
}

/// Evaluates a wave sum at `x ≠ 0`.
pub fn eval(waves: &[Wave], x: f64) -> f64 {
    waves
        .iter()
        .map(|w| {
            let p = match w.phase {
                Phase::Cos => (w.omega * x).cos(),
                Phase::Sin => (w.omega * x).sin(),
            };
            w.coef * x.powi(-(w.m as i32)) * p
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate_panels, QuadOptions};

    fn brute(w: &Wave, t: f64, upto: f64) -> f64 {
        let f = |x: f64| eval(std::slice::from_ref(w), x);
        integrate_panels(&f, t, upto, 0.25, QuadOptions::default()).value
    }

    #[test]
    fn power_tail() {
        let w = Wave { coef: 2.0, m: 3, omega: 0.0, phase: Phase::Cos };
        let r = wave_tail(&w, 4.0, 1e-15).unwrap();
        assert!((r.value - 2.0 / (2.0 * 16.0)).abs() < 1e-16);
        let bad = Wave { m: 1, ..w };
        assert_eq!(wave_tail(&bad, 4.0, 1e-15), Err(TailError::Divergent { m: 1 }));
    }

    #[test]
    fn oscillatory_tail_matches_long_quadrature() {
        // With m = 4 the part beyond 2000 is below 1e-10 in absolute value.
        for &(m, omega, phase) in &[(4, 3.0, Phase::Cos), (4, 2.5, Phase::Sin), (5, 1.2, Phase::Cos)] {
            let w = Wave { coef: 1.3, m, omega, phase };
            let t = 30.0;
            let r = wave_tail(&w, t, 1e-16).unwrap();
            let b = brute(&w, t, 2000.0);
            assert!((r.value - b).abs() < 2e-10, "m={m} ω={omega}: {} vs {b}", r.value);
        }
    }

    #[test]
    fn product_expansion() {
        let a = [Wave { coef: 1.0, m: 1, omega: 2.0, phase: Phase::Sin }, Wave { coef: 0.5, m: 2, omega: 0.0, phase: Phase::Cos }];
        let b = [Wave { coef: -2.0, m: 2, omega: 0.7, phase: Phase::Cos }, Wave { coef: 1.5, m: 1, omega: 3.0, phase: Phase::Sin }];
        let p = multiply(&a, &b);
        for &x in &[0.3, 1.7, 9.2] {
            let want = eval(&a, x) * eval(&b, x);
            assert!((eval(&p, x) - want).abs() < 1e-12 * want.abs().max(1.0));
        }
    }
}
