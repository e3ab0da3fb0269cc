//! Chebyshev machinery for the Sato–Tate measure and its weighted deformations.
//!
//! Here `T_ℓ(2cos θ) = sin((ℓ+1)θ)/sin θ`, orthonormal for
//! `dμ∞ = (1/π)√(1 − x²/4) dx` on `[−2, 2]`. All densities are relative to `μ∞`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::exactalg::{binomial, rat, rint, rpow, to_f64, Rational};
use crate::quad::{integrate_panels, QuadOptions, QuadResult};

#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("p must be at least 2, got {0}")]
    BadP(u64),
    #[error("r must be at least 1")]
    ZeroR,
    #[error("unweighted measures are only known for r in 1..=3, got {0}")]
    UnweightedRange(u32),
    #[error("|x| must be below 2 and |t| below 1, got x = {x}, t = {t}")]
    GeneratingDomain { x: f64, t: f64 },
    #[error("x = {0} lies outside [-2, 2]")]
    OutsideSupport(f64),
    #[error("hypergeometric series not converged after {terms} terms")]
    SeriesTruncation { terms: usize },
    #[error("the power form of a(p, r) needs r <= 3, got {0}")]
    PowerBranch(u32),
    #[error("the binomial form of a(p, r) needs r >= 3, got {0}")]
    BinomialBranch(u32),
}

/// `T_ℓ` in the monomial basis.
#[derive(Clone, Debug, PartialEq)]
pub struct ChebT {
    pub ell: u32,
    pub coeffs: Vec<Rational>,
}

impl ChebT {
    /// Builds `T_ℓ` from `T_{ℓ+1} = x T_ℓ − T_{ℓ−1}`.
    pub fn new(ell: u32) -> Self {
        let mut prev: Vec<Rational> = vec![Rational::one()];
        if ell == 0 {
            return ChebT { ell, coeffs: prev };
        }
        let mut cur: Vec<Rational> = vec![Rational::zero(), Rational::one()];
        for _ in 1..ell {
            let mut next = vec![Rational::zero(); cur.len() + 1];
            for (i, c) in cur.iter().enumerate() {
                next[i + 1] += c;
            }
            for (i, c) in prev.iter().enumerate() {
                next[i] -= c;
            }
            prev = cur;
            cur = next;
        }
        ChebT { ell, coeffs: cur }
    }

    /// Horner evaluation of the monomial form.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + to_f64(c))
    }
}

/// `T_ℓ(x)` by forward recurrence.
pub fn cheb_eval(ell: u32, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, x);
    if ell == 0 {
        return a;
    }
    for _ in 1..ell {
        let c = x * b - a;
        a = b;
        b = c;
    }
    b
}

fn mu_opts() -> QuadOptions {
    QuadOptions { rel_tol: 1e-12, abs_tol: 1e-16, max_depth: 30 }
}

/// `∫ f dμ∞` via `x = 2cos θ`, which turns the weight into `(2/π) sin²θ dθ` on `[0, π]`.
pub fn mu_inf_integral<F: Fn(f64) -> f64>(f: F) -> QuadResult {
    let g = |th: f64| {
        let s = th.sin();
        f(2.0 * th.cos()) * s * s
    };
    let r = integrate_panels(&g, 0.0, PI, PI / 8.0, mu_opts());
    QuadResult { value: r.value * 2.0 / PI, error: r.error * 2.0 / PI, converged: r.converged }
}

/// `∫ T_ℓ T_m dμ∞`.
pub fn cheb_orthonormality(ell: u32, m: u32) -> f64 {
    mu_inf_integral(|x| cheb_eval(ell, x) * cheb_eval(m, x)).value
}

/// Which of the four generating series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenKind {
    Plain,
    Ell,
    Ell2,
    Ell3,
}

impl GenKind {
    fn power(self) -> i32 {
        match self {
            GenKind::Plain => 0,
            GenKind::Ell => 1,
            GenKind::Ell2 => 2,
            GenKind::Ell3 => 3,
        }
    }
}

/// Closed rational form of `Σ ℓ^k T_ℓ(x) t^ℓ`.
pub fn generating_closed(kind: GenKind, x: f64, t: f64) -> f64 {
    let d = t * t - x * t + 1.0;
    match kind {
        GenKind::Plain => 1.0 / d,
        GenKind::Ell => (-2.0 * t * t + x * t) / (d * d),
        GenKind::Ell2 => (4.0 * t.powi(4) - 3.0 * x * t.powi(3) + (x * x - 4.0) * t * t + x * t) / d.powi(3),
        GenKind::Ell3 => {
            // Overall sign pinned by the small-t limit T_1(x)·t = x·t.
            let num = 8.0 * t - 32.0 * t.powi(3) + 8.0 * t.powi(5) - x + 18.0 * t * t * x
                - 5.0 * t.powi(4) * x
                - 4.0 * t * x * x
                + 4.0 * t.powi(3) * x * x
                - t * t * x.powi(3);
            -t * num / d.powi(4)
        }
    }
}

/// `(truncated series, closed form)`; the series stops once its tail bound is below `1e−16`.
///
/// The tail uses `|T_ℓ(x)| ≤ ℓ+1` on `[−2, 2]`.
pub fn generating_series_check(kind: GenKind, x: f64, t: f64) -> Result<(f64, f64), MeasureError> {
    if x.abs() >= 2.0 || t.abs() >= 1.0 {
        return Err(MeasureError::GeneratingDomain { x, t });
    }
    let k = kind.power();
    let at = t.abs();
    let (mut a, mut b) = (1.0, x);
    let mut tp = 1.0;
    let mut sum = 0.0;
    let mut ell = 0u32;
    loop {
        let tl = if ell == 0 { a } else { b };
        let w = if k == 0 { 1.0 } else { (ell as f64).powi(k) };
        sum += w * tl * tp;
        if ell >= 1 {
            let c = x * b - a;
            a = b;
            b = c;
        }
        tp *= t;
        ell += 1;
        // Bound on Σ_{j≥ℓ} (j+1)^{k+1}|t|^j with ratio q of consecutive bounds.
        let lf = ell as f64;
        let head = (lf + 1.0).powi(k + 1) * at.powi(ell as i32);
        let q = ((lf + 2.0) / (lf + 1.0)).powi(k + 1) * at;
        if q < 1.0 && head / (1.0 - q) < 1e-16 {
            break;
        }
        if ell > 100_000 {
            break;
        }
    }
    Ok((sum, generating_closed(kind, x, t)))
}

/// A measure on `[−2, 2]` given by its density relative to `μ∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MeasureSpec {
    pub p: u64,
    pub r: u32,
    /// `true` for the harmonically weighted family, `false` for the unweighted one.
    pub harmonic: bool,
}

impl MeasureSpec {
    pub fn new(p: u64, r: u32, harmonic: bool) -> Result<Self, MeasureError> {
        if p < 2 {
            return Err(MeasureError::BadP(p));
        }
        if r == 0 {
            return Err(MeasureError::ZeroR);
        }
        if !harmonic && r > 3 {
            return Err(MeasureError::UnweightedRange(r));
        }
        Ok(MeasureSpec { p, r, harmonic })
    }

    pub fn harmonic(p: u64, r: u32) -> Self {
        Self::new(p, r, true).expect("valid harmonic spec")
    }

    pub fn unweighted(p: u64, r: u32) -> Self {
        Self::new(p, r, false).expect("valid unweighted spec")
    }
}

/// Density of the measure relative to `μ∞`.
pub fn measure_density(spec: &MeasureSpec, x: f64) -> Result<f64, MeasureError> {
    let spec = MeasureSpec::new(spec.p, spec.r, spec.harmonic)?;
    if x.abs() > 2.0 {
        return Err(MeasureError::OutsideSupport(x));
    }
    let p = spec.p as f64;
    let ip = 1.0 / p;
    let sq = p.sqrt();
    let minus = 1.0 - x / sq + ip;
    let plus = 1.0 + x / sq + ip;
    let r = spec.r as i32;
    if spec.harmonic {
        let pre = if spec.r <= 3 {
            (1.0 - ip).powi(r * (r - 1) / 2)
        } else {
            1.0 / to_f64(&a_pr_closed(spec.p, spec.r)?)
        };
        return Ok(pre / minus.powi(r));
    }
    let v = match spec.r {
        1 => (1.0 - ip) * (1.0 + ip).powi(2) / (minus.powi(2) * plus),
        2 => (1.0 - ip * ip).powi(3) / (1.0 + ip * ip) / (minus.powi(3) * plus),
        3 => {
            let c = (1.0 - ip).powi(5) * (1.0 + ip).powi(4)
                / (1.0 + ip + 4.0 * ip * ip + ip.powi(3) + ip.powi(4));
            c / (minus.powi(4) * plus)
        }
        r => return Err(MeasureError::UnweightedRange(r)),
    };
    Ok(v)
}

/// `∫ T_ℓ dμ` by quadrature.
pub fn cheb_moment(spec: &MeasureSpec, ell: u32) -> Result<f64, MeasureError> {
    measure_density(spec, 0.0)?;
    Ok(mu_inf_integral(|x| cheb_eval(ell, x) * measure_density(spec, x).unwrap()).value)
}

/// Total mass `∫ dμ` by quadrature.
pub fn measure_mass(spec: &MeasureSpec) -> Result<f64, MeasureError> {
    cheb_moment(spec, 0)
}

/// Closed-form moment where one is available: harmonic `r ≤ 3`, unweighted `r ≤ 3`.
pub fn moment_closed(spec: &MeasureSpec, ell: u32) -> Option<f64> {
    let p = spec.p as f64;
    let scale = p.powf(-(ell as f64) / 2.0);
    let l = ell as f64;
    match (spec.harmonic, spec.r) {
        (true, 1) => Some(scale),
        (true, 2) => Some((l + 1.0) * scale),
        (true, 3) => Some(((0.5 - 0.5 / p) * l * l + (1.5 - 0.5 / p) * l + 1.0) * scale),
        (false, 1) => Some(to_f64(&unweighted_r1_bracket(spec.p, ell)) * scale),
        (false, 2) => Some(to_f64(&unweighted_r2_bracket(spec.p, ell)) * scale),
        (false, 3) => Some(to_f64(&h_ratio(spec.p, ell)) * scale),
        _ => None,
    }
}

/// Local lattice sum behind the unweighted `r = 1` moments: `Σ_{α ≤ ℓ} (1 if α even else 1/p)`.
pub fn unweighted_r1_bracket(p: u64, ell: u32) -> Rational {
    let ip = rat(1, p as i64);
    (0..=ell).map(|a| if a % 2 == 0 { Rational::one() } else { ip.clone() }).sum()
}

/// `ℓ+1 + Σ_{α=1}^{ℓ} (ℓ+1−α)(1−1/p){(1+(−1)^α)/2 + (1−(−1)^α)p/(p²+1)}`.
pub fn unweighted_r2_bracket(p: u64, ell: u32) -> Rational {
    let pi = p as i64;
    let c = Rational::one() - rat(1, pi);
    let odd = Rational::new(BigInt::from(2 * pi), BigInt::from(pi * pi + 1));
    let mut acc = rint(ell as i64 + 1);
    for a in 1..=ell {
        let parity = if a % 2 == 0 { Rational::one() } else { odd.clone() };
        acc += rint((ell + 1 - a) as i64) * &c * parity;
    }
    acc
}

/// Method for [`a_pr`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum APrMethod {
    Closed,
    Hypergeometric,
    Quadrature,
}

/// Result of [`a_pr`]: exact for the closed method, floating otherwise.
#[derive(Clone, Debug, PartialEq)]
pub enum APr {
    Exact(Rational),
    Approx(f64),
}

impl APr {
    pub fn to_f64(&self) -> f64 {
        match self {
            APr::Exact(q) => to_f64(q),
            APr::Approx(v) => *v,
        }
    }
}

fn check_pr(p: u64, r: u32) -> Result<(), MeasureError> {
    if p < 2 {
        return Err(MeasureError::BadP(p));
    }
    if r == 0 {
        return Err(MeasureError::ZeroR);
    }
    Ok(())
}

/// `a(p, r)` by the requested method.
pub fn a_pr(p: u64, r: u32, method: APrMethod) -> Result<APr, MeasureError> {
    check_pr(p, r)?;
    match method {
        APrMethod::Closed => a_pr_closed(p, r).map(APr::Exact),
        APrMethod::Hypergeometric => a_pr_hypergeometric(p, r).map(APr::Approx),
        APrMethod::Quadrature => Ok(APr::Approx(a_pr_quadrature(p, r))),
    }
}

/// Exact `a(p, r)`: the power form for `r ≤ 3`, the binomial form above.
pub fn a_pr_closed(p: u64, r: u32) -> Result<Rational, MeasureError> {
    check_pr(p, r)?;
    if r <= 3 {
        a_pr_power_form(p, r)
    } else {
        a_pr_binomial_form(p, r)
    }
}

/// `(1 − 1/p)^{−r(r−1)/2}`, valid for `r ≤ 3`.
pub fn a_pr_power_form(p: u64, r: u32) -> Result<Rational, MeasureError> {
    check_pr(p, r)?;
    if r > 3 {
        return Err(MeasureError::PowerBranch(r));
    }
    let c = Rational::one() - rat(1, p as i64);
    Ok(rpow(&c, -((r * (r - 1) / 2) as i64)))
}

/// `(1−1/p)^{1−2r}(Σ_{ℓ<r} C(r−1,ℓ)² p^{−ℓ} − Σ_{ℓ≤r−3} C(r−3,ℓ)C(r+1,ℓ+2) p^{−ℓ−1})`, valid for `r ≥ 3`.
pub fn a_pr_binomial_form(p: u64, r: u32) -> Result<Rational, MeasureError> {
    check_pr(p, r)?;
    if r < 3 {
        return Err(MeasureError::BinomialBranch(r));
    }
    let ip = rat(1, p as i64);
    let r64 = r as u64;
    let mut s = Rational::zero();
    for l in 0..r64 {
        let b = binomial(r64 - 1, l);
        s += Rational::from_integer(&b * &b) * rpow(&ip, l as i64);
    }
    for l in 0..=(r64 - 3) {
        let b = binomial(r64 - 3, l) * binomial(r64 + 1, l + 2);
        s -= Rational::from_integer(b) * rpow(&ip, l as i64 + 1);
    }
    let c = Rational::one() - ip;
    Ok(rpow(&c, 1 - 2 * r as i64) * s)
}

const HYPER_MAX_TERMS: usize = 20_000;

/// `Σ C(r+ℓ−1,ℓ)² p^{−ℓ} − Σ C(r+ℓ−1,ℓ)C(r+ℓ+1,ℓ+2) p^{−ℓ−1}` with a geometric tail bound.
pub fn a_pr_hypergeometric(p: u64, r: u32) -> Result<f64, MeasureError> {
    check_pr(p, r)?;
    let pf = p as f64;
    let rf = r as f64;
    // u_ℓ = C(r+ℓ−1,ℓ) p^{−ℓ/2}, v_ℓ = C(r+ℓ+1,ℓ+2) p^{−ℓ/2−1/2}: term_ℓ = u_ℓ² − u_ℓ v_ℓ
    let mut c1 = 1.0f64; // C(r+ℓ−1, ℓ)
    let mut c2 = (rf + 1.0) * rf / 2.0; // C(r+ℓ+1, ℓ+2)
    let mut pw = 1.0f64; // p^{−ℓ}
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for l in 0..HYPER_MAX_TERMS {
        let lf = l as f64;
        let a = c1 * c1 * pw;
        let b = c1 * c2 * pw / pf;
        s1 += a;
        s2 += b;
        // Ratios of consecutive terms of both series decrease toward 1/p.
        let ra = ((rf + lf) / (lf + 1.0)).powi(2) / pf;
        let rb = (rf + lf) / (lf + 1.0) * (rf + lf + 2.0) / (lf + 3.0) / pf;
        let na = a * ra;
        let nb = b * rb;
        if ra < 1.0 && rb < 1.0 {
            let tail = na / (1.0 - ra) + nb / (1.0 - rb);
            if tail < 1e-17 * (s1 - s2).abs() {
                return Ok(s1 - s2);
            }
        }
        c1 *= (rf + lf) / (lf + 1.0);
        c2 *= (rf + lf + 2.0) / (lf + 3.0);
        pw /= pf;
    }
    Err(MeasureError::SeriesTruncation { terms: HYPER_MAX_TERMS })
}

/// `(2/π)∫₀^π sin²θ/(1 − 2cos θ/√p + 1/p)^r dθ`.
pub fn a_pr_quadrature(p: u64, r: u32) -> f64 {
    let pf = p as f64;
    let sq = pf.sqrt();
    mu_inf_integral(|x| (1.0 - x / sq + 1.0 / pf).powi(-(r as i32))).value
}

/// `∫ Π T_{ℓ_i} dμ∞` for one prime.
pub fn delta_local(ells: &[u32]) -> f64 {
    mu_inf_integral(|x| ells.iter().map(|&l| cheb_eval(l, x)).product()).value
}

/// Prime factorization as `prime ↦ exponent`.
pub type Factored = BTreeMap<u64, u32>;

/// Trial-division factorization; `1` maps to the empty map.
pub fn factor(mut n: u64) -> Factored {
    assert!(n >= 1);
    let mut out = Factored::new();
    let mut d = 2u64;
    while d * d <= n {
        while n.is_multiple_of(d) {
            *out.entry(d).or_insert(0) += 1;
            n /= d;
        }
        d += 1;
    }
    if n > 1 {
        *out.entry(n).or_insert(0) += 1;
    }
    out
}

/// `δ(m_1,…,m_r)`: the product over primes of `∫ Π T_{v_p(m_i)} dμ∞`.
pub fn delta_sato_tate(ms: &[u64]) -> f64 {
    let facs: Vec<Factored> = ms.iter().map(|&m| factor(m)).collect();
    let mut primes: Vec<u64> = facs.iter().flat_map(|f| f.keys().copied()).collect();
    primes.sort_unstable();
    primes.dedup();
    primes
        .iter()
        .map(|p| {
            let ells: Vec<u32> = facs.iter().map(|f| f.get(p).copied().unwrap_or(0)).collect();
            delta_local(&ells)
        })
        .product()
}

/// `A_p(m; 0,…,0) = (1−1/p)^{r(r−1)/2} ∫ T_m(x)/(1 − x/√p + 1/p)^r dμ∞`.
#[allow(non_snake_case)]
pub fn A_p_at_zero(p: u64, r: u32, m: u32) -> f64 {
    let pf = p as f64;
    let sq = pf.sqrt();
    let ri = r as i32;
    let pre = (1.0 - 1.0 / pf).powi(ri * (ri - 1) / 2);
    pre * mu_inf_integral(|x| cheb_eval(m, x) * (1.0 - x / sq + 1.0 / pf).powi(-ri)).value
}

/// `g(p^ℓ) = ℓ+1 + (1−1/p)ℓ(ℓ+1)/2`.
pub fn g_value(p: u64, ell: u32) -> Rational {
    let l = ell as i64;
    rint(l + 1) + (Rational::one() - rat(1, p as i64)) * rat(l * (l + 1), 2)
}

/// `g` on a factored argument, multiplicatively.
pub fn g_factored(n: &Factored) -> Rational {
    n.iter().map(|(&p, &e)| g_value(p, e)).product()
}

/// `Σ_{β≥0} g(p^{L+2β}) p^{−2β}` summed in closed form.
fn g_even_tail(p: u64, big_l: u32) -> Rational {
    let pi = p as i64;
    let t = rat(1, pi * pi);
    let c = Rational::one() - rat(1, pi);
    let l = rint(big_l as i64);
    // g(p^{L+2β}) = A + Bβ + Cβ²
    let a = &l + rint(1) + &c * &l * (&l + rint(1)) / rint(2);
    let b = rint(2) + &c * (rint(2) * &l + rint(1));
    let cc = rint(2) * &c;
    let one_m = Rational::one() - &t;
    let s0 = one_m.recip();
    let s1 = &t / (&one_m * &one_m);
    let s2 = &t * (Rational::one() + &t) / (&one_m * &one_m * &one_m);
    a * s0 + b * s1 + cc * s2
}

/// `H(p^ℓ) = Σ_{α=0}^{ℓ} Σ_{β ≥ 0, 2β ≥ α} p^{α−2β} g(p^{ℓ+2β−2α})`, with the inner sums in closed form.
#[allow(non_snake_case)]
pub fn H_value(p: u64, ell: u32) -> Rational {
    let ip = rat(1, p as i64);
    (0..=ell)
        .map(|a| {
            if a % 2 == 0 {
                g_even_tail(p, ell - a)
            } else {
                &ip * g_even_tail(p, ell - a + 1)
            }
        })
        .sum()
}

/// `H(O_F)`, the local factor at `p` of `Σ_𝔩 g(𝔩²) N(𝔩)^{−2}`.
#[allow(non_snake_case)]
pub fn H_of_unit(p: u64) -> Rational {
    H_value(p, 0)
}

/// `Σ_β g(p^{2β}) p^{−2β}` from the generating function `Σ g(p^ℓ)y^ℓ = 1/(1−y)² + c·y/(1−y)³`.
pub fn l_p2_g(p: u64) -> Rational {
    let c = Rational::one() - rat(1, p as i64);
    let f = |y: Rational| {
        let om = Rational::one() - &y;
        (&om * &om).recip() + &c * &y / (&om * &om * &om)
    };
    let y = rat(1, p as i64);
    (f(y.clone()) + f(-y)) / rint(2)
}

/// `H(p^ℓ)/H(O_F)`.
pub fn h_ratio(p: u64, ell: u32) -> Rational {
    H_value(p, ell) / H_of_unit(p)
}

/// Closed polynomial-in-`ℓ` form of `H(p^ℓ)/H(O_F)`.
pub fn h_ratio_closed(p: u64, ell: u32) -> Rational {
    let n = rint(p as i64);
    let l = rint(ell as i64);
    let one = Rational::one();
    let d = rpow(&n, 4) + rpow(&n, 3) + rint(4) * rpow(&n, 2) + &n + &one;
    let nd = &n * &d;
    let t3 = rpow(&l, 3) * rpow(&(&n - &one), 2) * rpow(&(&n + &one), 3) / (rint(12) * &nd);
    let t2 = rpow(&l, 2) * (&n - &one) * rpow(&(&n + &one), 2)
        * (rint(5) * rpow(&n, 2) + rint(2) * &n + &one)
        / (rint(8) * &nd);
    let t1 = &l * (&n + &one)
        * (rint(17) * rpow(&n, 4) + rint(12) * rpow(&n, 3) + rint(20) * rpow(&n, 2) - &one)
        / (rint(12) * &nd);
    let t0 = rat(15, 16) * rpow(&n, 4) / &d + rat(21, 16) * rpow(&n, 3) / &d + rat(27, 8) * rpow(&n, 2) / &d
        + rat(13, 8) * &n / &d
        + rat(11, 16) / &d
        + rat(1, 16) / &nd;
    let alt_den = rpow(&n, 5) + rpow(&n, 4) + rint(4) * rpow(&n, 3) + rpow(&n, 2) + &n;
    let alt = rat(1, 16) * rpow(&n, 4) / &d - rat(5, 16) * rpow(&n, 3) / &d + rat(5, 8) * rpow(&n, 2) / &d
        - rat(5, 8) * &n / &d
        + rat(5, 16) / &d
        - rat(1, 16) / alt_den;
    let sign = if ell.is_multiple_of(2) { one.clone() } else { -one };
    t3 + t2 + t1 + t0 + sign * alt
}

/// `p^{−ℓ/2} H(p^ℓ)/H(O_F)`.
pub fn unweighted_moment_r3(p: u64, ell: u32) -> f64 {
    (p as f64).powf(-(ell as f64) / 2.0) * to_f64(&h_ratio(p, ell))
}

/// Number of divisors.
pub fn tau(n: &Factored) -> u64 {
    n.values().map(|&e| e as u64 + 1).product()
}

/// `τ(mn) = Σ_{d | (m,n)} μ(d) τ(m/d) τ(n/d)`.
pub fn divisor_utility(m: &Factored, n: &Factored) -> u64 {
    // Only squarefree d contribute; enumerate subsets of the common primes.
    let common: Vec<u64> = m.keys().filter(|p| n.contains_key(p)).copied().collect();
    let mut total: i64 = 0;
    for mask in 0u64..(1u64 << common.len()) {
        let mut mm = m.clone();
        let mut nn = n.clone();
        let mut sign = 1i64;
        for (i, p) in common.iter().enumerate() {
            if mask >> i & 1 == 1 {
                sign = -sign;
                for f in [&mut mm, &mut nn] {
                    let e = f.get_mut(p).expect("common prime");
                    *e -= 1;
                    if *e == 0 {
                        f.remove(p);
                    }
                }
            }
        }
        total += sign * (tau(&mm) * tau(&nn)) as i64;
    }
    total as u64
}

/// Product of two factorizations.
pub fn factored_product(m: &Factored, n: &Factored) -> Factored {
    let mut out = m.clone();
    for (&p, &e) in n {
        *out.entry(p).or_insert(0) += e;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_basics() {
        assert_eq!(cheb_eval(2, 1.0), 0.0);
        assert_eq!(cheb_eval(0, 123.0), 1.0);
        let x = 2.0 * (PI / 5.0).cos();
        assert!((cheb_eval(3, x) - (4.0 * PI / 5.0).sin() / (PI / 5.0).sin()).abs() < 1e-14);
        let t3 = ChebT::new(3);
        assert_eq!(t3.coeffs, vec![rint(0), rint(-2), rint(0), rint(1)]);
        assert!((t3.eval(0.7) - cheb_eval(3, 0.7)).abs() < 1e-15);
    }

    #[test]
    fn orthonormality_samples() {
        assert!((cheb_orthonormality(0, 0) - 1.0).abs() < 1e-12);
        assert!((cheb_orthonormality(3, 3) - 1.0).abs() < 1e-12);
        assert!(cheb_orthonormality(2, 5).abs() < 1e-12);
    }

    #[test]
    fn generating_examples() {
        let (s, c) = generating_series_check(GenKind::Plain, 1.0, 0.5).unwrap();
        assert!((c - 4.0 / 3.0).abs() < 1e-15);
        assert!((s - c).abs() < 1e-13);
        let (s, c) = generating_series_check(GenKind::Ell, 0.4, 0.0).unwrap();
        assert_eq!((s, c), (0.0, 0.0));
        let (s, c) = generating_series_check(GenKind::Ell3, 0.3, 0.4).unwrap();
        assert!((s - c).abs() < 1e-12);
        assert!(generating_series_check(GenKind::Plain, 0.0, 1.0).is_err());
    }

    #[test]
    fn density_examples() {
        let s1 = MeasureSpec::harmonic(7, 1);
        let x: f64 = 0.3;
        let want = 1.0 / (1.0 - x / 7f64.sqrt() + 1.0 / 7.0);
        assert!((measure_density(&s1, x).unwrap() - want).abs() < 1e-15);
        let s2 = MeasureSpec::harmonic(4, 2);
        assert!((measure_density(&s2, 0.0).unwrap() - 12.0 / 25.0).abs() < 1e-15);
        assert_eq!(MeasureSpec::new(3, 4, false), Err(MeasureError::UnweightedRange(4)));
        assert_eq!(MeasureSpec::new(1, 1, true), Err(MeasureError::BadP(1)));
    }

    #[test]
    fn a_pr_small_cases() {
        for p in [2, 3, 10] {
            assert_eq!(a_pr_closed(p, 1).unwrap(), rint(1));
        }
        for p in [2, 3, 5, 7, 11] {
            assert_eq!(a_pr_power_form(p, 3).unwrap(), a_pr_binomial_form(p, 3).unwrap());
        }
        let q = a_pr_quadrature(2, 5);
        let c = to_f64(&a_pr_closed(2, 5).unwrap());
        assert!((q - c).abs() < 1e-10 * c);
        assert!(a_pr_power_form(2, 4).is_err());
        assert!(a_pr_binomial_form(2, 2).is_err());
    }

    #[test]
    fn delta_examples() {
        assert!((delta_sato_tate(&[5, 5]) - 1.0).abs() < 1e-12);
        assert!((delta_sato_tate(&[1, 6, 6]) - delta_sato_tate(&[6, 6])).abs() < 1e-14);
        assert!((delta_sato_tate(&[3, 3, 9]) - 1.0).abs() < 1e-12);
        assert!(delta_sato_tate(&[2, 3]).abs() < 1e-12);
    }

    #[test]
    fn a_p_examples() {
        for (p, r) in [(2, 2), (3, 3), (5, 4)] {
            let a0 = A_p_at_zero(p, r, 0);
            let pre = (1.0 - 1.0 / p as f64).powi((r * (r - 1) / 2) as i32);
            assert!((a0 - pre * to_f64(&a_pr_closed(p, r).unwrap())).abs() < 1e-12);
        }
        assert!((A_p_at_zero(1_000_000, 3, 0) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn g_and_h_examples() {
        assert_eq!(g_value(7, 0), rint(1));
        assert_eq!(g_value(7, 2), rint(3) + rint(3) * (rint(1) - rat(1, 7)));
        assert_eq!(h_ratio(5, 0), rint(1));
        assert_eq!(h_ratio(2, 3), h_ratio_closed(2, 3));
        assert_eq!(H_of_unit(3), l_p2_g(3));
    }

    #[test]
    fn divisor_examples() {
        let p = factor(7);
        assert_eq!(divisor_utility(&p, &p), 3);
        assert_eq!(divisor_utility(&factor(7), &factor(11)), 4);
        assert_eq!(divisor_utility(&factor(49), &factor(343)), 6);
        assert_eq!(tau(&factor(1)), 1);
    }
}
