//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Each line compares a library route with an oracle written here (closed
//! forms, direct quadrature, plain loops) or with published constants.
//! The process exits 0 so that the workspace test run reports the lines
//! without aborting; set `WLD_ACCEPTANCE_STRICT=1` to exit 1 on any failure.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use wld_core::exactalg::{rat, rpow, Rational};
use wld_core::hiprec::Fixed;
use wld_core::kernels::{
    fourier_moment_identity_check, grid, h_closed, h_eval, h_series_hp, hp_bits_for, density_functional, Family,
    Kernel, KernelId, TestFunctionPair,
};
use wld_core::measures::{
    a_pr_binomial_form, a_pr_closed, a_pr_hypergeometric, a_pr_power_form, a_pr_quadrature, generating_closed,
    h_ratio, h_ratio_closed, measure_density, GenKind, MeasureSpec,
};
use wld_core::primesums::{explicit_formula_rhs, lemma41_partial_sum, sieve};
use wld_core::quad::{GaussRule, NeumaierSum};
use wld_core::residues::b_table;
use wld_core::rmt::{jacobi_finite_n, weighted_one_level_multi};

struct Outcome {
    passed: bool,
    summary: String,
}

fn le(measured: f64, tol: f64) -> Outcome {
    Outcome { passed: measured <= tol, summary: format!("measured {measured:.3e} tol {tol:.1e}") }
}

fn run(id: u32, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let took = start.elapsed();
    let in_time = took <= budget;
    let passed = out.passed && in_time;
    let timing = if in_time { String::new() } else { " (over time budget)".to_string() };
    println!(
        "{} {id:>2} {name}: {} time {:.2}s/{}s{timing}",
        if passed { "PASS" } else { "FAIL" },
        out.summary,
        took.as_secs_f64(),
        budget.as_secs()
    );
    passed
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

/// Composite Gauss–Legendre on `[a, b]` with `panels` equal pieces.
fn gauss(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let rule = GaussRule::new(24);
    let h = (b - a) / panels as f64;
    let mut acc = NeumaierSum::default();
    for i in 0..panels {
        acc.add(rule.apply(&f, a + i as f64 * h, a + (i + 1) as f64 * h));
    }
    acc.total()
}

/// Published nonzero `(j, b_r(j))`; every other `j ≤ 2r−2` is zero.
fn published_b(r: u32) -> Vec<(u32, Rational)> {
    match r {
        2 => vec![(0, rat(8, 1)), (1, rat(4, 1))],
        3 => vec![(0, rat(8, 1)), (1, rat(8, 1)), (3, rat(-8, 1))],
        4 => vec![(0, rat(64, 45)), (1, rat(32, 15)), (3, rat(-16, 3)), (5, rat(16, 1))],
        _ => unreachable!(),
    }
}

fn c1() -> Outcome {
    let mut bad = Vec::new();
    for r in 2..=4 {
        let t = b_table(r).unwrap();
        let want = published_b(r);
        for j in 0..=(2 * r - 2) {
            let expect = want.iter().find(|(k, _)| *k == j).map(|(_, v)| v.clone()).unwrap_or_else(|| rat(0, 1));
            if t.get(j) != expect {
                bad.push(format!("b_{r}({j})={}", t.get(j)));
            }
        }
    }
    Outcome { passed: bad.is_empty(), summary: format!("mismatches {bad:?}") }
}

fn c2() -> Outcome {
    let mut bad = Vec::new();
    for r in 1..=6u32 {
        let t = b_table(r).unwrap();
        let bound = (2 * r - 2).min(r * (r - 1) / 2);
        for j in 0..=(2 * r + 2) {
            let even_gap = j >= 2 && j <= 2 * r - 2 && j % 2 == 0;
            if (even_gap || j > bound) && t.get(j) != rat(0, 1) {
                bad.push((r, j));
            }
        }
    }
    Outcome { passed: bad.is_empty(), summary: format!("nonzero entries that must vanish {bad:?}") }
}

fn theorem_a(r: u32, x: f64) -> f64 {
    let y = 2.0 * PI * x;
    let (s, c) = y.sin_cos();
    let px = PI * x;
    match r {
        1 => 1.0 - s / y,
        2 => 1.0 + s / y + (c - 1.0) / (px * px),
        3 => {
            1.0 - s / y - 3.0 * (c - 1.0) / (px * px)
                + 6.0 * (s - y) / px.powi(3)
                + 3.0 * (c - 1.0 + 2.0 * px * px) / px.powi(4)
        }
        _ => unreachable!(),
    }
}

fn c3() -> Outcome {
    let xs = grid(-5.0, 5.0, 200);
    let mut worst: f64 = 0.0;
    for r in 1..=4u32 {
        let t = b_table(r).unwrap();
        let d = Kernel::new(KernelId::new(Family::ConjectureD, r), Some(&t)).unwrap();
        let so = Kernel::new(KernelId::new(Family::SOeven, r), None).unwrap();
        for &x in &xs {
            worst = worst.max((d.eval(x) - so.eval(x)).abs());
            if r <= 3 {
                worst = worst.max((d.eval(x) - theorem_a(r, x)).abs());
            }
        }
    }
    le(worst, 1e-10)
}

/// `∫₀¹ tⁿ cos(2πxt) dt` by fixed panels, resolving every half period.
fn h_oracle(n: u32, x: f64) -> f64 {
    let panels = 8 + 4 * x.abs().ceil() as usize;
    gauss(|t| t.powi(n as i32) * (2.0 * PI * x * t).cos(), 0.0, 1.0, panels)
}

fn c4() -> Outcome {
    let mut worst: f64 = 0.0;
    for x in grid(0.0, 50.0, 201).into_iter().flat_map(|x| [x, -x]) {
        let ctx = Fixed::new(hp_bits_for(x, 96));
        let series = h_series_hp(&ctx, 8, x);
        for n in 0..=8u32 {
            let oracle = h_oracle(n, x);
            let s = ctx.to_f64(&series[n as usize]);
            let mut d = (s - oracle).abs().max((h_eval(n, x) - oracle).abs());
            if x != 0.0 {
                d = d.max((h_closed(n).eval_direct(x) - oracle).abs());
            } else {
                d = d.max((s - 1.0 / (n + 1) as f64).abs());
            }
            worst = worst.max(d);
        }
    }
    le(worst, 1e-10)
}

fn c5() -> Outcome {
    let mut worst: f64 = 0.0;
    for &delta in &[0.25, 0.5, 0.75] {
        let pair = TestFunctionPair::fejer(delta);
        for n in 0..=3u32 {
            // ∫₀^δ (1 − u/δ)uⁿ du for the Fejér transform.
            let exact = delta.powi(n as i32 + 1) / ((n + 1) * (n + 2)) as f64;
            let m = fourier_moment_identity_check(&pair, n).unwrap();
            worst = worst.max((m.lhs - exact).abs()).max((m.rhs - exact).abs());
        }
    }
    le(worst, 1e-8)
}

/// `∫T_ℓ dμ` with `x = 2cos θ`, `dμ∞ = (2/π)sin²θ dθ`, `T_ℓ(2cos θ) = sin((ℓ+1)θ)/sin θ`.
fn moment_oracle(spec: &MeasureSpec, ell: u32) -> f64 {
    let f = |th: f64| {
        let rho = measure_density(spec, 2.0 * th.cos()).unwrap();
        2.0 / PI * ((ell + 1) as f64 * th).sin() * th.sin() * rho
    };
    gauss(f, 0.0, PI, 64)
}

fn closed_moment(spec: &MeasureSpec, ell: u32) -> Option<f64> {
    let p = spec.p as f64;
    let l = ell as f64;
    let scale = p.powf(-l / 2.0);
    match (spec.harmonic, spec.r) {
        (true, 2) => Some((l + 1.0) * scale),
        (true, 3) => Some(((1.0 - 1.0 / p) * l * (l + 1.0) / 2.0 + l + 1.0) * scale),
        (false, 3) => Some(wld_core::exactalg::to_f64(&h_ratio_closed(spec.p, ell)) * scale),
        _ => None,
    }
}

fn c6() -> Outcome {
    let mut mass: f64 = 0.0;
    let mut min_density = f64::INFINITY;
    let mut moments: f64 = 0.0;
    for &p in &[2u64, 3, 4, 5, 25] {
        for r in 1..=3 {
            for spec in [MeasureSpec::harmonic(p, r), MeasureSpec::unweighted(p, r)] {
                mass = mass.max((moment_oracle(&spec, 0) - 1.0).abs());
                // Interior points of (−2, 2).
                for i in 1..=1000 {
                    let x = -2.0 + 4.0 * i as f64 / 1001.0;
                    min_density = min_density.min(measure_density(&spec, x).unwrap());
                }
                for ell in 0..=10 {
                    if let Some(c) = closed_moment(&spec, ell) {
                        moments = moments.max((moment_oracle(&spec, ell) - c).abs());
                    }
                }
            }
        }
    }
    Outcome {
        passed: mass <= 1e-10 && min_density > 0.0 && moments <= 1e-10,
        summary: format!("mass {mass:.3e} min density {min_density:.3e} moments {moments:.3e} tol 1.0e-10"),
    }
}

fn c7() -> Outcome {
    let bad: Vec<(u64, u32)> = [2u64, 3, 5]
        .iter()
        .flat_map(|&p| (0..=8).map(move |l| (p, l)))
        .filter(|&(p, l)| h_ratio(p, l) != h_ratio_closed(p, l))
        .collect();
    Outcome { passed: bad.is_empty(), summary: format!("unequal (p, l) {bad:?}") }
}

fn c8() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut exact_bad = Vec::new();
    for &p in &[2u64, 3, 5, 7] {
        for r in 1..=8u32 {
            let closed = a_pr_closed(p, r).unwrap();
            let c = wld_core::exactalg::to_f64(&closed);
            let h = a_pr_hypergeometric(p, r).unwrap();
            let q = a_pr_quadrature(p, r);
            worst = worst.max(((h - c) / c).abs()).max(((q - c) / c).abs());
            if r <= 3 {
                let power = rpow(&(rat(1, 1) - rat(1, p as i64)), -((r * (r - 1) / 2) as i64));
                if closed != power {
                    exact_bad.push((p, r));
                }
            }
            if r == 3 && a_pr_power_form(p, 3).unwrap() != a_pr_binomial_form(p, 3).unwrap() {
                exact_bad.push((p, r));
            }
        }
    }
    Outcome {
        passed: worst <= 1e-10 && exact_bad.is_empty(),
        summary: format!("relative spread {worst:.3e} tol 1.0e-10, exact mismatches {exact_bad:?}"),
    }
}

/// `Σ_{ℓ ≤ 600} ℓ^k T_ℓ(x) tˡ` by the three-term recurrence.
fn generating_oracle(k: i32, x: f64, t: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    let mut acc = NeumaierSum::default();
    let mut tp = 1.0;
    for ell in 0..=600 {
        acc.add((ell as f64).powi(k) * cur * tp);
        let next = x * cur - prev;
        prev = cur;
        cur = next;
        tp *= t;
    }
    acc.total()
}

fn c9() -> Outcome {
    let mut worst: f64 = 0.0;
    for (k, kind) in [GenKind::Plain, GenKind::Ell, GenKind::Ell2, GenKind::Ell3].into_iter().enumerate() {
        for x in grid(-1.5, 1.5, 5) {
            for t in grid(-0.6, 0.6, 5) {
                worst = worst.max((generating_closed(kind, x, t) - generating_oracle(k as i32, x, t)).abs());
            }
        }
    }
    le(worst, 1e-12)
}

const RMT_N: usize = 40;
const RMT_SAMPLES: usize = 200_000;
const RMT_SEED: u64 = 20_240_601;
const RMT_DRIFT: f64 = 0.02;

fn c10() -> Outcome {
    let pair = TestFunctionPair::fejer(0.5);
    let est = weighted_one_level_multi(RMT_N, RMT_SAMPLES, &[1, 2], RMT_SEED, &pair).unwrap();
    let mut passed = true;
    let mut parts = Vec::new();
    for (e, r) in est.iter().zip([1u32, 2]) {
        let dev = (e.weighted_mean - e.reference).abs();
        let tol = 3.0 * e.std_error + RMT_DRIFT;
        passed &= dev <= tol;
        parts.push(format!(
            "r={r} estimate {:.5} reference {:.5} dev {dev:.4} tol {tol:.4} z {:.2} ess {:.0} exact N={RMT_N} value {:.5}",
            e.weighted_mean,
            e.reference,
            e.z_score,
            e.effective_samples,
            jacobi_finite_n(RMT_N, r, &pair)
        ));
    }
    Outcome { passed, summary: parts.join("; ") }
}

fn c11() -> Outcome {
    let delta = 0.5;
    let pair = TestFunctionPair::fejer(delta);
    let table = sieve(10_000_000).unwrap();
    let count_ok = table.primes.len() == 664_579;
    let mut passed = count_ok;
    let mut parts = vec![format!("pi(1e7)={}", table.primes.len())];
    for n in 1..=2u32 {
        let mut errs = Vec::new();
        for &big_r in &[1e6, 1e8, 1e10, 1e12, 1e14] {
            let s = lemma41_partial_sum(n, big_r, &pair, &table).unwrap();
            let log_r: f64 = big_r.ln();
            let mut acc = NeumaierSum::default();
            for &p in &table.primes {
                let lp = (p as f64).ln();
                acc.add(lp.powi(n as i32) / p as f64 * (1.0 - lp / (log_r * delta)).max(0.0));
            }
            let lhs = acc.total() / log_r;
            let rhs = log_r.powi(n as i32 - 1) * delta.powi(n as i32) / (n * (n + 1)) as f64;
            passed &= (s.lhs - lhs).abs() <= 1e-9 * lhs && (s.rhs - rhs).abs() <= 1e-12 * rhs;
            errs.push((lhs - rhs).abs() / rhs);
        }
        let at_top = *errs.last().unwrap();
        let trend = errs.windows(2).all(|w| w[1] < 2.0 * w[0]) && at_top < errs[0];
        passed &= at_top < 0.1 && trend;
        parts.push(format!("n={n} rel_error {at_top:.4} tol 0.1 sweep {errs:.4?}"));
    }
    Outcome { passed, summary: parts.join("; ") }
}

fn c12() -> Outcome {
    let mut worst: f64 = 0.0;
    for (r, deltas) in [(1u32, [0.5, 0.3]), (2, [0.25, 0.2]), (3, [0.5, 0.3])] {
        let k = Kernel::new(KernelId::new(Family::TheoremA, r), None).unwrap();
        for delta in deltas {
            let pair = TestFunctionPair::fejer(delta);
            // Fejér: Φ̂(0) = 1, Φ(0) = δ, ∫Φ̂u = δ²/6, ∫Φ̂u³ = δ⁴/20.
            let (m1, m3) = (delta * delta / 6.0, delta.powi(4) / 20.0);
            let exact = match r {
                1 => 1.0 - 0.5 * delta,
                2 => 1.0 - 1.5 * delta + 4.0 * m1,
                _ => 1.0 - 2.5 * delta + 12.0 * m1 - 8.0 * m3,
            };
            let lib = explicit_formula_rhs(r, &pair).unwrap();
            let integral = density_functional(&k, &pair).unwrap();
            worst = worst.max((lib - exact).abs()).max((integral - exact).abs());
        }
    }
    le(worst, 1e-8)
}

fn main() {
    let results = [
        run(1, "b-table exactness", secs(1), c1),
        run(2, "vanishing laws", secs(30), c2),
        run(3, "kernel agreement", secs(10), c3),
        run(4, "h_n dual route", secs(10), c4),
        run(5, "Fourier moment identity", secs(30), c5),
        run(6, "measure suite", secs(60), c6),
        run(7, "H ratio closed form", secs(5), c7),
        run(8, "a(p,r) triple agreement", secs(10), c8),
        run(9, "generating series", secs(5), c9),
        run(10, "RMT weighted one-level", secs(600), c10),
        run(11, "prime sum asymptotic", secs(60), c11),
        run(12, "explicit formula constants", secs(10), c12),
    ];
    let failed = results.iter().filter(|&&p| !p).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 && std::env::var("WLD_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
