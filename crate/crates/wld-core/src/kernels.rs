//! Cosine-moment kernels `h_n`, the one-level density kernels and test-function pairs.
//!
//! Closed forms are held as [`TrigRational`]s, exact sums of
//! `c·π^e·x^k·{1, cos 2πx, sin 2πx}` with rational `c`. Derivatives are exact,
//! and the Laurent expansion at 0 is exact as well, grouped by power of `π`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::exactalg::{binomial, factorial, rint, to_f64, Rational};
use crate::hiprec::Fixed;
use crate::osc::{self, Phase, Wave};
use crate::quad::{integrate, integrate_panels, QuadOptions};
use crate::residues::BTable;

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("theorem A kernels exist only for r in 1..=3, got {0}")]
    TheoremARange(u32),
    #[error("r must be at least 1 for this family")]
    ZeroR,
    #[error("conjecture D kernel needs a b-table for r = {0}")]
    MissingBTable(u32),
    #[error("b-table is for r = {table} but kernel asks for r = {wanted}")]
    BTableMismatch { table: u32, wanted: u32 },
    #[error("c_(j,r) needs 1 <= j <= r, got j = {j}, r = {r}")]
    CjrRange { j: u32, r: u32 },
    #[error("kernel minus one still has a polynomial part")]
    NotDecaying,
    #[error("quadrature did not converge (error estimate {0:e})")]
    NonConvergence(f64),
    #[error("tail estimate {0:e} exceeds tolerance")]
    TailTooLarge(f64),
    #[error("support radius {0} is outside (0, 1)")]
    Support(f64),
}

/// Which trigonometric factor multiplies a term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TrigKind {
    Const,
    Cos,
    Sin,
}

/// Exact linear combination of `π^e·x^k·kind(2πx)` with rational coefficients.
///
/// Nonnegative `k` with `Const` make up the polynomial part.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrigRational {
    terms: BTreeMap<(i32, TrigKind, i32), Rational>,
}

impl TrigRational {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The rational constant `c`.
    pub fn constant(c: Rational) -> Self {
        Self::term(0, TrigKind::Const, 0, c)
    }

    /// The single term `c·π^pi_pow·x^k·kind(2πx)`.
    pub fn term(k: i32, kind: TrigKind, pi_pow: i32, c: Rational) -> Self {
        let mut t = Self::zero();
        t.push(k, kind, pi_pow, c);
        t
    }

    /// `sin(2πx)/(2πx)`.
    pub fn sinc() -> Self {
        Self::term(-1, TrigKind::Sin, -1, Rational::new(BigInt::one(), BigInt::from(2)))
    }

    fn push(&mut self, k: i32, kind: TrigKind, e: i32, c: Rational) {
        if c.is_zero() {
            return;
        }
        let key = (k, kind, e);
        let v = self.terms.entry(key).or_insert_with(Rational::zero);
        *v += c;
        if v.is_zero() {
            self.terms.remove(&key);
        }
    }

    /// Iterates over `((k, kind, π power), coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (&(i32, TrigKind, i32), &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (&(k, kind, e), c) in &o.terms {
            out.push(k, kind, e, c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-Rational::one()))
    }

    pub fn scale(&self, s: &Rational) -> Self {
        let mut out = Self::zero();
        for (&(k, kind, e), c) in &self.terms {
            out.push(k, kind, e, c * s);
        }
        out
    }

    /// Multiplies by `c·π^de·x^dk`.
    pub fn shift(&self, dk: i32, de: i32, c: &Rational) -> Self {
        let mut out = Self::zero();
        for (&(k, kind, e), v) in &self.terms {
            out.push(k + dk, kind, e + de, v * c);
        }
        out
    }

    /// Exact first derivative in `x`.
    pub fn derivative(&self) -> Self {
        let mut out = Self::zero();
        for (&(k, kind, e), c) in &self.terms {
            if k != 0 {
                out.push(k - 1, kind, e, c * rint(k as i64));
            }
            match kind {
                TrigKind::Const => {}
                TrigKind::Cos => out.push(k, TrigKind::Sin, e + 1, c * rint(-2)),
                TrigKind::Sin => out.push(k, TrigKind::Cos, e + 1, c * rint(2)),
            }
        }
        out
    }

    /// Exact `order`-th derivative.
    pub fn nth_derivative(&self, order: u32) -> Self {
        (0..order).fold(self.clone(), |f, _| f.derivative())
    }

    /// Smallest power of `x` present, or 0 for the zero function.
    pub fn min_power(&self) -> i32 {
        self.terms.keys().map(|k| k.0).min().unwrap_or(0)
    }

    /// Evaluation term by term in `f64`; loses accuracy near `x = 0`.
    pub fn eval_direct(&self, x: f64) -> f64 {
        let (s, c) = (2.0 * PI * x).sin_cos();
        self.terms
            .iter()
            .map(|(&(k, kind, e), q)| {
                let t = match kind {
                    TrigKind::Const => 1.0,
                    TrigKind::Cos => c,
                    TrigKind::Sin => s,
                };
                to_f64(q) * PI.powi(e) * x.powi(k) * t
            })
            .sum()
    }

    /// Evaluation in fixed-point arithmetic; `x` must be nonzero if any `k < 0`.
    pub fn eval_hp(&self, ctx: &Fixed, x: f64) -> BigInt {
        let xf = ctx.from_f64(x);
        let (c, s) = ctx.cos_sin_2pi(&xf);
        let mut acc = BigInt::zero();
        for (&(k, kind, e), q) in &self.terms {
            let mut t = ctx.from_rational(q);
            t = ctx.mul(&t, &ctx.powi(ctx.pi(), e));
            t = ctx.mul(&t, &ctx.powi(&xf, k));
            t = match kind {
                TrigKind::Const => t,
                TrigKind::Cos => ctx.mul(&t, &c),
                TrigKind::Sin => ctx.mul(&t, &s),
            };
            acc += t;
        }
        acc
    }

    /// Laurent coefficients at 0 up to `x^max_power`, as `power ↦ (π power ↦ coefficient)`.
    pub fn laurent(&self, max_power: i32) -> BTreeMap<i32, BTreeMap<i32, Rational>> {
        let mut out: BTreeMap<i32, BTreeMap<i32, Rational>> = BTreeMap::new();
        let mut add = |p: i32, e: i32, c: Rational| {
            if c.is_zero() {
                return;
            }
            let row = out.entry(p).or_default();
            let v = row.entry(e).or_insert_with(Rational::zero);
            *v += c;
            if v.is_zero() {
                row.remove(&e);
            }
        };
        for (&(k, kind, e), c) in &self.terms {
            match kind {
                TrigKind::Const => {
                    if k <= max_power {
                        add(k, e, c.clone());
                    }
                }
                TrigKind::Cos | TrigKind::Sin => {
                    let start = if kind == TrigKind::Cos { 0 } else { 1 };
                    let mut i = start;
                    while k + i <= max_power {
                        // Coefficient of x^i in cos(2πx) or sin(2πx), without the π^i.
                        let sign = if ((i - start) / 2) % 2 == 0 { 1 } else { -1 };
                        let q = Rational::new(BigInt::from(sign) << i as usize, factorial(i as u32));
                        add(k + i, e + i, c * q);
                        i += 2;
                    }
                }
            }
        }
        out.retain(|_, row| !row.is_empty());
        out
    }

    /// True when every negative power cancels exactly, so the function is regular at 0.
    pub fn is_regular_at_zero(&self) -> bool {
        self.laurent(-1).is_empty()
    }

    /// Value of the continuous extension at 0, if regular.
    pub fn value_at_zero(&self) -> Option<f64> {
        if !self.is_regular_at_zero() {
            return None;
        }
        Some(
            self.laurent(0)
                .get(&0)
                .map(|row| row.iter().map(|(e, c)| to_f64(c) * PI.powi(*e)).sum())
                .unwrap_or(0.0),
        )
    }

    /// The function as a sum of waves, valid for `x ≠ 0`. `None` if a positive power is present.
    pub fn to_waves(&self) -> Option<Vec<Wave>> {
        let mut out = Vec::new();
        for (&(k, kind, e), c) in &self.terms {
            if k > 0 {
                return None;
            }
            let coef = to_f64(c) * PI.powi(e);
            let (omega, phase) = match kind {
                TrigKind::Const => (0.0, Phase::Cos),
                TrigKind::Cos => (2.0 * PI, Phase::Cos),
                TrigKind::Sin => (2.0 * PI, Phase::Sin),
            };
            out.push(Wave { coef, m: (-k) as u32, omega, phase });
        }
        Some(out)
    }
}

/// Beyond this `|x|` the power series is never used.
const SERIES_MAX_X: f64 = 1.5;
/// Highest power kept in the compiled series; the tail is below `1e-19` at `|x| = 1.5`.
const SERIES_ORDER: i32 = 64;

/// `f64` evaluator for a [`TrigRational`] that picks, per point, the better conditioned
/// of the closed form and the Laurent series.
#[derive(Clone, Debug)]
pub struct CompiledTrig {
    closed: Vec<(i32, TrigKind, f64)>,
    series: Option<Vec<f64>>,
}

impl CompiledTrig {
    pub fn new(f: &TrigRational) -> Self {
        let closed = f
            .terms
            .iter()
            .map(|(&(k, kind, e), c)| (k, kind, to_f64(c) * PI.powi(e)))
            .collect();
        let series = if f.is_regular_at_zero() {
            let lau = f.laurent(SERIES_ORDER);
            let mut coeffs = vec![0.0; SERIES_ORDER as usize + 1];
            for (p, row) in lau {
                coeffs[p as usize] = row.iter().map(|(e, c)| to_f64(c) * PI.powi(*e)).sum();
            }
            Some(coeffs)
        } else {
            None
        };
        CompiledTrig { closed, series }
    }

    /// `(value, Σ|term|)` of the closed form.
    pub fn eval_closed(&self, x: f64) -> (f64, f64) {
        let (s, c) = (2.0 * PI * x).sin_cos();
        let mut v = 0.0;
        let mut cond = 0.0;
        for &(k, kind, q) in &self.closed {
            let t = q * x.powi(k);
            cond += t.abs();
            v += match kind {
                TrigKind::Const => t,
                TrigKind::Cos => t * c,
                TrigKind::Sin => t * s,
            };
        }
        (v, cond)
    }

    /// `(value, Σ|term|)` of the series, if the function is regular at 0.
    pub fn eval_series(&self, x: f64) -> Option<(f64, f64)> {
        let coeffs = self.series.as_ref()?;
        let mut v = 0.0;
        let mut cond = 0.0;
        for &a in coeffs.iter().rev() {
            v = v * x + a;
            cond = cond * x.abs() + a.abs();
        }
        Some((v, cond))
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x.abs() <= SERIES_MAX_X {
            if let Some((vs, cs)) = self.eval_series(x) {
                if x == 0.0 {
                    return vs;
                }
                let (vc, cc) = self.eval_closed(x);
                return if cs <= cc { vs } else { vc };
            }
        }
        self.eval_closed(x).0
    }
}

/// Closed form of `h_n(x) = ∫₀¹ tⁿ cos(2πxt) dt` by integration by parts.
///
/// With `a = 2πx`: `C_0 = sin a/a`, `S_0 = (1 − cos a)/a`,
/// `C_n = sin a/a − (n/a) S_{n−1}`, `S_n = −cos a/a + (n/a) C_{n−1}`.
pub fn h_closed(n: u32) -> TrigRational {
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    // 1/a = ½·π^{-1}·x^{-1}
    let over_a = |f: &TrigRational, c: Rational| f.shift(-1, -1, &(c * &half));
    let sin_over_a = TrigRational::sinc();
    let cos_over_a = TrigRational::term(-1, TrigKind::Cos, -1, half.clone());
    let one_over_a = TrigRational::term(-1, TrigKind::Const, -1, half.clone());
    let mut c = sin_over_a.clone();
    let mut s = one_over_a.sub(&cos_over_a);
    for k in 1..=n {
        let kk = rint(k as i64);
        let c_next = sin_over_a.sub(&over_a(&s, kk.clone()));
        let s_next = over_a(&c, kk).sub(&cos_over_a);
        c = c_next;
        s = s_next;
    }
    c
}

fn h_cache() -> &'static Vec<CompiledTrig> {
    static CACHE: OnceLock<Vec<CompiledTrig>> = OnceLock::new();
    CACHE.get_or_init(|| (0..=16).map(|n| CompiledTrig::new(&h_closed(n))).collect())
}

/// `Σ_m (−1)^m (2πx)^{2m}/((2m)!(n+2m+1))` in `f64` with its absolute-term sum.
pub fn h_series_with_cond(n: u32, x: f64) -> (f64, f64) {
    let u2 = (2.0 * PI * x).powi(2);
    let mut term = 1.0f64;
    let mut sum = 0.0;
    let mut cond = 0.0;
    let mut m = 0u32;
    loop {
        let t = term / (n + 2 * m + 1) as f64;
        sum += if m.is_multiple_of(2) { t } else { -t };
        cond += t;
        if t < 1e-18 * cond && (2 * m) as f64 > u2.sqrt() {
            break;
        }
        term *= u2 / ((2 * m + 1) * (2 * m + 2)) as f64;
        m += 1;
        if m > 2000 {
            break;
        }
    }
    (sum, cond)
}

/// The everywhere convergent series for `h_n`; accurate only for moderate `|x|`.
pub fn h_series(n: u32, x: f64) -> f64 {
    h_series_with_cond(n, x).0
}

/// `h_n(x)`, choosing per point the better conditioned of series and closed form.
pub fn h_eval(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return 1.0 / (n + 1) as f64;
    }
    let owned;
    let compiled = match h_cache().get(n as usize) {
        Some(c) => c,
        None => {
            owned = CompiledTrig::new(&h_closed(n));
            &owned
        }
    };
    if x.abs() <= SERIES_MAX_X {
        let (vs, cs) = h_series_with_cond(n, x);
        let (vc, cc) = compiled.eval_closed(x);
        return if cs <= cc { vs } else { vc };
    }
    compiled.eval_closed(x).0
}

/// `h_n(x)` by adaptive quadrature of the defining integral.
pub fn h_quadrature(n: u32, x: f64) -> f64 {
    let f = |t: f64| t.powi(n as i32) * (2.0 * PI * x * t).cos();
    let panel = 1.0 / (1.0 + x.abs()).ceil();
    let opts = QuadOptions { rel_tol: 1e-13, abs_tol: 1e-15, max_depth: 40 };
    integrate_panels(&f, 0.0, 1.0, panel, opts).value
}

/// The series for `h_0..=h_nmax` at one point in fixed-point arithmetic.
pub fn h_series_hp(ctx: &Fixed, nmax: u32, x: f64) -> Vec<BigInt> {
    let xf = ctx.from_f64(x);
    let u = ctx.mul(&(ctx.pi() * 2), &xf);
    let u2 = ctx.mul(&u, &u);
    let ubound = ctx.to_f64(&u).abs();
    let mut sums = vec![BigInt::zero(); nmax as usize + 1];
    let mut term = ctx.one();
    let mut m = 0u64;
    while !(term.is_zero() && (2 * m) as f64 > ubound) {
        for (n, s) in sums.iter_mut().enumerate() {
            let t = &term / (n as u64 + 2 * m + 1);
            if m.is_multiple_of(2) {
                *s += t;
            } else {
                *s -= t;
            }
        }
        term = ctx.mul(&term, &u2) / ((2 * m + 1) * (2 * m + 2));
        m += 1;
    }
    sums
}

/// Fractional bits needed so the fixed-point series for `h_n` keeps `extra` bits at `|x|`.
pub fn hp_bits_for(x: f64, extra: usize) -> usize {
    let u = 2.0 * PI * x.abs();
    (u / std::f64::consts::LN_2).ceil() as usize + extra
}

/// Kernel families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    TheoremA,
    ConjectureD,
    Sp,
    SOeven,
    U,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::TheoremA => "theoremA",
            Family::ConjectureD => "conjectureD",
            Family::Sp => "Sp",
            Family::SOeven => "SOeven",
            Family::U => "U",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "theorema" => Some(Family::TheoremA),
            "conjectured" => Some(Family::ConjectureD),
            "sp" => Some(Family::Sp),
            "soeven" => Some(Family::SOeven),
            "u" => Some(Family::U),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct KernelId {
    pub family: Family,
    pub r: u32,
}

impl KernelId {
    pub fn new(family: Family, r: u32) -> Self {
        KernelId { family, r }
    }
}

/// `c_{j,r} = (1/j)·C(r−1, j−1)·C(r+j, j−1)`.
pub fn c_jr(j: u32, r: u32) -> Result<Rational, KernelError> {
    if j < 1 || j > r {
        return Err(KernelError::CjrRange { j, r });
    }
    let num = binomial((r - 1) as u64, (j - 1) as u64) * binomial((r + j) as u64, (j - 1) as u64);
    Ok(Rational::new(num, BigInt::from(j)))
}

/// Exact `order`-th derivative.
pub fn trig_derivative(f: &TrigRational, order: u32) -> TrigRational {
    f.nth_derivative(order)
}

/// `(1 − cos 2πx)/(2πx)`.
pub fn one_minus_cos_over() -> TrigRational {
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    TrigRational::term(-1, TrigKind::Const, -1, half.clone())
        .sub(&TrigRational::term(-1, TrigKind::Cos, -1, half))
}

fn theorem_a(r: u32) -> Result<TrigRational, KernelError> {
    let one = TrigRational::constant(Rational::one());
    let sinc = TrigRational::sinc();
    // (cos 2πx − 1)/(π²x²)
    let cm1 = TrigRational::term(-2, TrigKind::Cos, -2, rint(1))
        .add(&TrigRational::term(-2, TrigKind::Const, -2, rint(-1)));
    match r {
        1 => Ok(one.sub(&sinc)),
        2 => Ok(one.add(&sinc).add(&cm1)),
        3 => {
            // 6(sin 2πx − 2πx)/(π³x³)
            let s3 = TrigRational::term(-3, TrigKind::Sin, -3, rint(6))
                .add(&TrigRational::term(-2, TrigKind::Const, -2, rint(-12)));
            // 3(cos 2πx − 1 + 2π²x²)/(π⁴x⁴)
            let c4 = TrigRational::term(-4, TrigKind::Cos, -4, rint(3))
                .add(&TrigRational::term(-4, TrigKind::Const, -4, rint(-3)))
                .add(&TrigRational::term(-2, TrigKind::Const, -2, rint(6)));
            Ok(one.sub(&sinc).sub(&cm1.scale(&rint(3))).add(&s3).add(&c4))
        }
        _ => Err(KernelError::TheoremARange(r)),
    }
}

fn conjecture_d(r: u32, table: &BTable) -> Result<TrigRational, KernelError> {
    if table.r != r {
        return Err(KernelError::BTableMismatch { table: table.r, wanted: r });
    }
    let b0 = table.get(0);
    let mut w = TrigRational::constant(Rational::one()).add(&h_closed(0));
    let rr = rint(r as i64);
    for j in 0..=BTable::support_bound(r) {
        let bj = table.get(j);
        if bj.is_zero() {
            continue;
        }
        let sign = if j % 2 == 0 { 1 } else { -1 };
        let coef = Rational::new(BigInt::from(sign) << (j + 1) as usize, factorial(j)) * bj / &b0;
        w = w.sub(&h_closed(j).scale(&(&rr * coef)));
    }
    Ok(w)
}

/// `W_Sp^r` for `r ≥ −1`; `r = −1` gives `1 + sinc` and `r = 0` gives `1 − sinc`.
pub fn sp_kernel(r: i32) -> TrigRational {
    assert!(r >= -1);
    let one = TrigRational::constant(Rational::one());
    let mut w = one.sub(&TrigRational::sinc().scale(&rint(2 * r as i64 + 1)));
    if r >= 1 {
        let g = one_minus_cos_over();
        let ru = r as u32;
        for j in 1..=ru {
            let order = 2 * j - 1;
            let c = c_jr(j, ru).expect("j in range");
            let pre = Rational::new(BigInt::from(ru * (ru + 1)), BigInt::one() << (2 * j - 2) as usize)
                * c
                / rint(order as i64);
            w = w.add(&g.nth_derivative(order).shift(0, -(order as i32), &pre));
        }
    }
    w
}

/// Exact closed form of a kernel.
pub fn kernel_trig(id: KernelId, table: Option<&BTable>) -> Result<TrigRational, KernelError> {
    let r = id.r;
    match id.family {
        Family::TheoremA => theorem_a(r),
        Family::ConjectureD => {
            if r == 0 {
                return Err(KernelError::ZeroR);
            }
            let t = table.ok_or(KernelError::MissingBTable(r))?;
            conjecture_d(r, t)
        }
        Family::Sp => {
            if r == 0 {
                return Err(KernelError::ZeroR);
            }
            Ok(sp_kernel(r as i32))
        }
        Family::SOeven => Ok(sp_kernel(r as i32 - 1)),
        Family::U => {
            if r == 0 {
                return Err(KernelError::ZeroR);
            }
            let half = Rational::new(BigInt::one(), BigInt::from(2));
            Ok(sp_kernel(r as i32 - 1).add(&sp_kernel(r as i32)).scale(&half))
        }
    }
}

/// A kernel ready for repeated evaluation.
#[derive(Clone, Debug)]
pub struct Kernel {
    pub id: KernelId,
    pub trig: TrigRational,
    compiled: CompiledTrig,
}

impl Kernel {
    pub fn new(id: KernelId, table: Option<&BTable>) -> Result<Self, KernelError> {
        let trig = kernel_trig(id, table)?;
        let compiled = CompiledTrig::new(&trig);
        Ok(Kernel { id, trig, compiled })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.compiled.eval(x)
    }
}

/// One-off kernel evaluation. Builds the closed form on every call; use [`Kernel`] in loops.
pub fn w_eval(id: KernelId, x: f64, table: Option<&BTable>) -> Result<f64, KernelError> {
    Ok(Kernel::new(id, table)?.eval(x))
}

/// Test functions with compactly supported Fourier transform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TestFamily {
    /// `Φ(x) = δ(sin(πδx)/(πδx))²`, `Φ̂(u) = (1 − |u|/δ)₊`.
    Fejer,
    /// The zero function.
    Zero,
}

/// An even test function `Φ` with `Φ̂` supported in `[−δ, δ]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestFunctionPair {
    pub delta: f64,
    pub family: TestFamily,
}

impl TestFunctionPair {
    pub fn fejer(delta: f64) -> Self {
        assert!(delta > 0.0, "support radius must be positive");
        TestFunctionPair { delta, family: TestFamily::Fejer }
    }

    pub fn zero(delta: f64) -> Self {
        TestFunctionPair { delta, family: TestFamily::Zero }
    }

    pub fn phi(&self, x: f64) -> f64 {
        match self.family {
            TestFamily::Zero => 0.0,
            TestFamily::Fejer => {
                let y = PI * self.delta * x;
                if y == 0.0 {
                    self.delta
                } else {
                    let s = y.sin() / y;
                    self.delta * s * s
                }
            }
        }
    }

    pub fn phi_hat(&self, u: f64) -> f64 {
        match self.family {
            TestFamily::Zero => 0.0,
            TestFamily::Fejer => (1.0 - u.abs() / self.delta).max(0.0),
        }
    }

    /// `Φ` as a wave sum, valid for `x ≠ 0`.
    pub fn phi_waves(&self) -> Vec<Wave> {
        match self.family {
            TestFamily::Zero => Vec::new(),
            TestFamily::Fejer => {
                // (1 − cos 2πδx)/(2π²δx²)
                let c = 1.0 / (2.0 * PI * PI * self.delta);
                vec![
                    Wave { coef: c, m: 2, omega: 0.0, phase: Phase::Cos },
                    Wave { coef: -c, m: 2, omega: 2.0 * PI * self.delta, phase: Phase::Cos },
                ]
            }
        }
    }

    /// `∫₀^δ Φ̂(u)uⁿ du` by quadrature.
    pub fn hat_moment(&self, n: u32) -> f64 {
        let f = |u: f64| self.phi_hat(u) * u.powi(n as i32);
        integrate(&f, 0.0, self.delta, QuadOptions::default()).value
    }
}

/// Where the x-integrals switch from quadrature to the asymptotic tail.
const TAIL_START: f64 = 200.0;
const TAIL_TOL: f64 = 1e-15;

/// `∫_ℝ Φ(x)·g(x) dx` for an even `g` given in closed form with no polynomial part.
fn even_integral<F: Fn(f64) -> f64>(
    pair: &TestFunctionPair,
    g: F,
    g_closed: &TrigRational,
) -> Result<(f64, f64), KernelError> {
    if pair.family == TestFamily::Zero {
        return Ok((0.0, 0.0));
    }
    let waves = g_closed.to_waves().ok_or(KernelError::NotDecaying)?;
    let prod = osc::multiply(&pair.phi_waves(), &waves);
    let tail = osc::tail_sum(&prod, TAIL_START, TAIL_TOL / prod.len().max(1) as f64)
        .map_err(|e| match e {
            osc::TailError::Inaccurate { bound } => KernelError::TailTooLarge(bound),
            osc::TailError::Divergent { .. } => KernelError::NotDecaying,
        })?;
    let f = |x: f64| pair.phi(x) * g(x);
    let opts = QuadOptions { rel_tol: 1e-13, abs_tol: 1e-16, max_depth: 40 };
    let body = integrate_panels(&f, 0.0, TAIL_START, 0.5, opts);
    if !body.converged {
        return Err(KernelError::NonConvergence(body.error));
    }
    Ok((2.0 * (body.value + tail.value), 2.0 * (body.error + tail.bound)))
}

/// Both sides of `∫₀^∞ Φ̂(u)uⁿ du = ∫_ℝ Φ(x)h_n(x) dx`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentIdentity {
    pub lhs: f64,
    pub rhs: f64,
    /// Quadrature error estimate plus the certified tail remainder of `rhs`.
    pub rhs_error: f64,
}

/// Evaluates the two sides of the Fourier moment identity.
pub fn fourier_moment_identity_check(pair: &TestFunctionPair, n: u32) -> Result<MomentIdentity, KernelError> {
    if !(pair.delta > 0.0 && pair.delta < 1.0) {
        return Err(KernelError::Support(pair.delta));
    }
    let lhs = pair.hat_moment(n);
    let (rhs, rhs_error) = even_integral(pair, |x| h_eval(n, x), &h_closed(n))?;
    Ok(MomentIdentity { lhs, rhs, rhs_error })
}

/// `∫_ℝ Φ(x)W(x) dx`, split as `Φ̂(0) + ∫Φ·(W − 1)`.
pub fn density_functional(kernel: &Kernel, pair: &TestFunctionPair) -> Result<f64, KernelError> {
    if pair.family == TestFamily::Zero {
        return Ok(0.0);
    }
    let minus_one = kernel.trig.sub(&TrigRational::constant(Rational::one()));
    let (v, _) = even_integral(pair, |x| kernel.eval(x) - 1.0, &minus_one)?;
    Ok(pair.phi_hat(0.0) + v)
}

/// Largest `|f(x) − g(x)|` over the points.
pub fn max_abs_diff<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(f: F, g: G, xs: &[f64]) -> f64 {
    xs.iter().map(|&x| (f(x) - g(x)).abs()).fold(0.0, f64::max)
}

/// `n` points evenly spaced on `[a, b]`, endpoints included when `n ≥ 2`.
pub fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Exact rational value of a kernel's continuous extension at 0, when it is free of `π`.
pub fn rational_value_at_zero(f: &TrigRational) -> Option<Rational> {
    let lau = f.laurent(0);
    if lau.keys().any(|&p| p < 0) {
        return None;
    }
    match lau.get(&0) {
        None => Some(Rational::zero()),
        Some(row) if row.len() == 1 && row.contains_key(&0) => Some(row[&0].clone()),
        Some(row) if row.iter().all(|(_, c)| c.is_zero()) => Some(Rational::zero()),
        _ => None,
    }
}
