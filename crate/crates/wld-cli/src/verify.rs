//! The `verify` suite: named checks with measured value and tolerance.

use std::collections::BTreeMap;

use serde::Serialize;

use wld_core::exactalg::{rat, rpow, Rational};
use wld_core::hiprec::Fixed;
use wld_core::kernels::{
    density_functional, fourier_moment_identity_check, grid, h_closed, h_eval, h_quadrature, h_series_hp,
    hp_bits_for, Family, Kernel, KernelId, TestFunctionPair,
};
use wld_core::measures::{
    a_pr_binomial_form, a_pr_closed, a_pr_hypergeometric, a_pr_power_form, a_pr_quadrature, cheb_moment,
    generating_series_check, h_ratio, h_ratio_closed, measure_density, measure_mass, moment_closed, GenKind,
    MeasureSpec,
};
use wld_core::primesums::{explicit_formula_rhs, lemma41_partial_sum, sieve};
use wld_core::residues::{b_coefficient, b_table, BTable};
use wld_core::rmt::weighted_one_level_multi;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Fast,
    Full,
}

/// One named check.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_score: Option<f64>,
    pub detail: String,
}

impl Check {
    fn le(name: impl Into<String>, measured: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed: measured <= tolerance,
            measured,
            tolerance,
            z_score: None,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub level: Level,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn failures(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }
}

/// Computed inputs the suite checks; replaceable for fault injection.
#[derive(Clone, Debug)]
pub struct VerifyInputs {
    /// `b_r(j)` tables for `r = 1..=6`.
    pub b_tables: BTreeMap<u32, BTable>,
}

impl VerifyInputs {
    pub fn compute() -> Self {
        let b_tables = (1..=6).map(|r| (r, b_table(r).expect("r within default limit"))).collect();
        VerifyInputs { b_tables }
    }
}

fn published_b(r: u32) -> Vec<Rational> {
    match r {
        2 => vec![rat(8, 1), rat(4, 1), rat(0, 1)],
        3 => vec![rat(8, 1), rat(8, 1), rat(0, 1), rat(-8, 1), rat(0, 1)],
        4 => vec![rat(64, 45), rat(32, 15), rat(0, 1), rat(-16, 3), rat(0, 1), rat(16, 1), rat(0, 1)],
        _ => unreachable!("no published table for r = {r}"),
    }
}

fn check_b_tables(inputs: &VerifyInputs) -> Vec<Check> {
    (2..=4)
        .map(|r| {
            let want = published_b(r);
            let mismatches = match inputs.b_tables.get(&r) {
                Some(t) => (0..=2 * r + 2).filter(|&j| t.get(j) != *want.get(j as usize).unwrap_or(&rat(0, 1))).count(),
                None => want.len(),
            };
            Check::le(format!("b-table r={r}"), mismatches as f64, 0.0, "entries differing from the published table")
        })
        .collect()
}

fn check_vanishing(inputs: &VerifyInputs) -> Check {
    let mut bad = Vec::new();
    for r in 1..=6u32 {
        let t = &inputs.b_tables[&r];
        let top = BTable::support_bound(r);
        for j in 0..=2 * r + 2 {
            let even_gap = j % 2 == 0 && j >= 2 && j <= 2 * r - 2;
            if !(even_gap || j > top) {
                continue;
            }
            let v = if j <= 2 * r - 2 { t.get(j) } else { b_coefficient(r, j).expect("r ≤ 6") };
            if v != rat(0, 1) {
                bad.push(format!("b_{r}({j})"));
            }
        }
    }
    Check::le("vanishing laws r<=6", bad.len() as f64, 0.0, bad.join(" "))
}

fn check_kernels(inputs: &VerifyInputs) -> Check {
    let xs = grid(-5.0, 5.0, 200);
    let mut worst: f64 = 0.0;
    for r in 1..=4u32 {
        let d = Kernel::new(KernelId::new(Family::ConjectureD, r), inputs.b_tables.get(&r)).expect("table present");
        let mut others = vec![Kernel::new(KernelId::new(Family::SOeven, r), None).unwrap()];
        if r <= 3 {
            others.push(Kernel::new(KernelId::new(Family::TheoremA, r), None).unwrap());
        }
        for k in &others {
            for &x in &xs {
                worst = worst.max((d.eval(x) - k.eval(x)).abs());
            }
        }
    }
    Check::le("kernel agreement", worst, 1e-10, "conjectureD vs theoremA (r<=3) and SOeven (r<=4)")
}

fn check_h_routes(level: Level) -> Check {
    let npts = if level == Level::Full { 201 } else { 51 };
    let mut worst: f64 = 0.0;
    for x in grid(0.0, 50.0, npts).into_iter().flat_map(|x| [x, -x]) {
        let ctx = Fixed::new(hp_bits_for(x, 96));
        let series = h_series_hp(&ctx, 8, x);
        for n in 0..=8u32 {
            let s = ctx.to_f64(&series[n as usize]);
            let prod = h_eval(n, x);
            let quad = h_quadrature(n, x);
            let mut d = (prod - s).abs().max((quad - s).abs());
            if x != 0.0 {
                let closed = ctx.to_f64(&h_closed(n).eval_hp(&ctx, x));
                d = d.max((closed - s).abs());
            }
            worst = worst.max(d);
        }
    }
    Check::le("h_n routes", worst, 1e-10, "series vs closed vs quadrature, n<=8, |x|<=50")
}

fn check_fourier() -> Check {
    let mut worst: f64 = 0.0;
    for &delta in &[0.25, 0.5, 0.75] {
        let pair = TestFunctionPair::fejer(delta);
        for n in 0..=3 {
            let m = fourier_moment_identity_check(&pair, n).expect("valid support");
            worst = worst.max((m.lhs - m.rhs).abs());
        }
    }
    Check::le("fourier moment identity", worst, 1e-8, "Fejer delta in {1/4,1/2,3/4}, n<=3")
}

fn measure_specs() -> Vec<MeasureSpec> {
    let mut v = Vec::new();
    for &p in &[2u64, 3, 4, 5, 25] {
        for r in 1..=3 {
            v.push(MeasureSpec::harmonic(p, r));
            v.push(MeasureSpec::unweighted(p, r));
        }
    }
    v
}

fn check_measures() -> Vec<Check> {
    let mut mass: f64 = 0.0;
    let mut min_density = f64::INFINITY;
    let mut moments: f64 = 0.0;
    for s in measure_specs() {
        mass = mass.max((measure_mass(&s).unwrap() - 1.0).abs());
        for x in grid(-2.0, 2.0, 401) {
            min_density = min_density.min(measure_density(&s, x).unwrap());
        }
        for ell in 0..=10 {
            let c = moment_closed(&s, ell).expect("closed form exists for r <= 3");
            moments = moments.max((cheb_moment(&s, ell).unwrap() - c).abs());
        }
    }
    vec![
        Check::le("measure mass", mass, 1e-10, "six families, p in {2,3,4,5,25}"),
        Check {
            name: "measure positivity".into(),
            passed: min_density > 0.0,
            measured: min_density,
            tolerance: 0.0,
            z_score: None,
            detail: "minimum density on a 401-point grid; must be > 0".into(),
        },
        Check::le("measure moments", moments, 1e-10, "quadrature vs closed forms, l<=10"),
    ]
}

fn check_h_ratio() -> Check {
    let bad = [2u64, 3, 5]
        .iter()
        .flat_map(|&p| (0..=8).map(move |l| (p, l)))
        .filter(|&(p, l)| h_ratio(p, l) != h_ratio_closed(p, l))
        .count();
    Check::le("H ratio closed form", bad as f64, 0.0, "exact equality, p in {2,3,5}, l<=8")
}

fn check_a_pr() -> Vec<Check> {
    let mut worst: f64 = 0.0;
    let mut exact_bad = 0usize;
    for &p in &[2u64, 3, 5, 7] {
        for r in 1..=8 {
            let c = wld_core::exactalg::to_f64(&a_pr_closed(p, r).unwrap());
            let h = a_pr_hypergeometric(p, r).unwrap();
            let q = a_pr_quadrature(p, r);
            worst = worst.max(((h - c) / c).abs()).max(((q - c) / c).abs());
            if r <= 3 {
                let expect = rpow(&(rat(1, 1) - rat(1, p as i64)), -((r * (r - 1) / 2) as i64));
                exact_bad += usize::from(a_pr_closed(p, r).unwrap() != expect);
            }
            if r == 3 {
                exact_bad += usize::from(a_pr_power_form(p, 3).unwrap() != a_pr_binomial_form(p, 3).unwrap());
            }
        }
    }
    vec![
        Check::le("a(p,r) routes", worst, 1e-10, "relative spread of closed, series and quadrature"),
        Check::le("a(p,r) exact forms", exact_bad as f64, 0.0, "power form for r<=3 and branch overlap at r=3"),
    ]
}

fn check_generating() -> Check {
    let mut worst: f64 = 0.0;
    for kind in [GenKind::Plain, GenKind::Ell, GenKind::Ell2, GenKind::Ell3] {
        for x in grid(-1.5, 1.5, 5) {
            for t in grid(-0.6, 0.6, 5) {
                let (s, c) = generating_series_check(kind, x, t).unwrap();
                worst = worst.max((s - c).abs());
            }
        }
    }
    Check::le("generating series", worst, 1e-12, "four identities on a 5x5 grid")
}

fn check_lemma41() -> Vec<Check> {
    let pair = TestFunctionPair::fejer(0.5);
    let table = sieve(10_000_000).expect("within budget");
    let mut out = Vec::new();
    for n in 1..=2 {
        let s = lemma41_partial_sum(n, 1e14, &pair, &table).unwrap();
        out.push(Check::le(format!("prime sum n={n}"), s.rel_error, 0.1, "R=1e14, primes to 1e7"));
        let errs: Vec<f64> = [1e6, 1e8, 1e10, 1e12, 1e14]
            .iter()
            .map(|&r| lemma41_partial_sum(n, r, &pair, &table).unwrap().rel_error)
            .collect();
        let worst_ratio = errs.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
        out.push(Check::le(
            format!("prime sum trend n={n}"),
            worst_ratio,
            2.0,
            format!("largest ratio of consecutive errors over R=1e6..1e14: {errs:?}"),
        ));
    }
    out
}

fn check_explicit() -> Check {
    let mut worst: f64 = 0.0;
    for (r, deltas) in [(1u32, [0.5, 0.3]), (2, [0.25, 0.2]), (3, [0.5, 0.3])] {
        let k = Kernel::new(KernelId::new(Family::TheoremA, r), None).unwrap();
        for delta in deltas {
            let pair = TestFunctionPair::fejer(delta);
            let a = explicit_formula_rhs(r, &pair).unwrap();
            let b = density_functional(&k, &pair).unwrap();
            worst = worst.max((a - b).abs());
        }
    }
    Check::le("explicit formula constants", worst, 1e-8, "r=1,2,3 inside the support windows")
}

/// Monte Carlo settings for the full level.
pub const RMT_N: usize = 40;
pub const RMT_SAMPLES: usize = 200_000;
pub const RMT_SEED: u64 = 20_240_601;
pub const RMT_DRIFT: f64 = 0.02;

fn check_rmt() -> Vec<Check> {
    let pair = TestFunctionPair::fejer(0.5);
    let est = weighted_one_level_multi(RMT_N, RMT_SAMPLES, &[1, 2], RMT_SEED, &pair).expect("valid config");
    est.iter()
        .zip([1, 2])
        .map(|(e, r)| {
            let dev = (e.weighted_mean - e.reference).abs();
            let tol = 3.0 * e.std_error + RMT_DRIFT;
            Check {
                name: format!("rmt r={r}"),
                passed: dev <= tol,
                measured: dev,
                tolerance: tol,
                z_score: Some(e.z_score),
                detail: format!(
                    "estimate {} reference {} std_error {} effective samples {:.1}",
                    e.weighted_mean, e.reference, e.std_error, e.effective_samples
                ),
            }
        })
        .collect()
}

/// Runs the suite on the given inputs.
pub fn run_verify_with(level: Level, inputs: &VerifyInputs) -> Report {
    let mut checks = check_b_tables(inputs);
    checks.push(check_vanishing(inputs));
    checks.push(check_kernels(inputs));
    checks.push(check_h_routes(level));
    checks.push(check_fourier());
    checks.extend(check_measures());
    checks.push(check_h_ratio());
    checks.extend(check_a_pr());
    checks.push(check_generating());
    checks.extend(check_lemma41());
    checks.push(check_explicit());
    if level == Level::Full {
        checks.extend(check_rmt());
    }
    let passed = checks.iter().all(|c| c.passed);
    Report { level, passed, checks }
}

/// Runs the suite on freshly computed inputs.
pub fn run_verify(level: Level) -> Report {
    run_verify_with(level, &VerifyInputs::compute())
}
