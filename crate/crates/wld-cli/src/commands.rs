//! Command bodies. Each returns the full text of its output file.

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde_json::{json, Value};

use wld_core::kernels::{grid, Family, Kernel, KernelId, TestFunctionPair};
use wld_core::measures::{cheb_moment, measure_density, moment_closed, MeasureSpec};
use wld_core::primesums::{lemma41_partial_sum, sieve};
use wld_core::residues::{b_table_with_limit, DEFAULT_MAX_R};
use wld_core::rmt::{weighted_one_level, RMTConfig};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// JSON text with a trailing newline.
pub fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

/// `r, j, numerator, denominator` for every `r ≤ r_max`.
pub fn b_table_csv(r_max: u32, allow_large: bool) -> Result<String> {
    if r_max == 0 {
        bail!("--r-max must be at least 1");
    }
    if r_max > DEFAULT_MAX_R && !allow_large {
        bail!("--r-max above {DEFAULT_MAX_R} needs --allow-large (cost grows very quickly)");
    }
    let limit = r_max.max(DEFAULT_MAX_R);
    let mut rows = Vec::new();
    for r in 1..=r_max {
        let t = b_table_with_limit(r, limit)?;
        for (j, v) in &t.values {
            rows.push(vec![r.to_string(), j.to_string(), v.numer().to_string(), v.denom().to_string()]);
        }
    }
    csv_text(&["r", "j", "numerator", "denominator"], rows)
}

const CURVE_FAMILIES: [Family; 5] = [Family::TheoremA, Family::ConjectureD, Family::Sp, Family::SOeven, Family::U];

fn kernel_for(family: Family, r: u32) -> Result<Kernel> {
    let table = if family == Family::ConjectureD && r >= 1 {
        Some(b_table_with_limit(r, DEFAULT_MAX_R)?)
    } else {
        None
    };
    Ok(Kernel::new(KernelId::new(family, r), table.as_ref())?)
}

/// Kernel curves on a uniform grid. With `family` set only that column is written
/// and an unavailable kernel is an error; otherwise unavailable columns are left empty.
pub fn density_curve_csv(family: Option<Family>, r: u32, x_min: f64, x_max: f64, npoints: usize) -> Result<String> {
    if npoints == 0 {
        bail!("--npoints must be at least 1");
    }
    if x_min.is_nan() || x_max.is_nan() || x_min > x_max {
        bail!("--x-min must not exceed --x-max");
    }
    let kernels: Vec<(Family, Option<Kernel>)> = match family {
        Some(f) => vec![(f, Some(kernel_for(f, r).with_context(|| format!("kernel {} r={r}", f.name()))?))],
        None => CURVE_FAMILIES.iter().map(|&f| (f, kernel_for(f, r).ok())).collect(),
    };
    let mut header = vec!["x".to_string()];
    header.extend(kernels.iter().map(|(f, _)| format!("W_{}", f.name())));
    let xs = grid(x_min, x_max, npoints);
    let rows = xs
        .par_iter()
        .map(|&x| {
            let mut row = vec![fmt_f64(x)];
            row.extend(kernels.iter().map(|(_, k)| k.as_ref().map(|k| fmt_f64(k.eval(x))).unwrap_or_default()));
            row
        })
        .collect();
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    csv_text(&h, rows)
}

/// Chebyshev moments by quadrature next to the closed forms.
pub fn measure_moments_csv(p: u64, r: u32, harmonic: bool, ell_max: u32) -> Result<String> {
    let spec = MeasureSpec::new(p, r, harmonic)?;
    let rows: Result<Vec<Vec<String>>> = (0..=ell_max)
        .into_par_iter()
        .map(|ell| {
            let q = cheb_moment(&spec, ell)?;
            let c = moment_closed(&spec, ell);
            Ok(vec![
                p.to_string(),
                r.to_string(),
                harmonic.to_string(),
                ell.to_string(),
                fmt_f64(q),
                c.map(fmt_f64).unwrap_or_default(),
                c.map(|c| fmt_f64((q - c).abs())).unwrap_or_default(),
            ])
        })
        .collect();
    csv_text(&["p", "r", "harmonic", "ell", "moment_quadrature", "moment_closed", "abs_diff"], rows?)
}

/// Density on `[−2, 2]`, both relative to `μ∞` and with respect to `dx`.
pub fn measure_density_csv(p: u64, r: u32, harmonic: bool, npoints: usize) -> Result<String> {
    let spec = MeasureSpec::new(p, r, harmonic)?;
    if npoints == 0 {
        bail!("--npoints must be at least 1");
    }
    let rows: Result<Vec<Vec<String>>> = grid(-2.0, 2.0, npoints)
        .into_iter()
        .map(|x| {
            let rel = measure_density(&spec, x)?;
            let st = (1.0 - x * x / 4.0).max(0.0).sqrt() / std::f64::consts::PI;
            Ok(vec![fmt_f64(x), fmt_f64(rel), fmt_f64(rel * st)])
        })
        .collect();
    csv_text(&["x", "density_vs_sato_tate", "density"], rows?)
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

/// Weighted one-level statistic of `SO(2N)` against the Fejér pair of radius `delta`.
pub fn rmt_sim_json(n: usize, samples: usize, r: u32, delta: f64, seed: u64) -> Result<Value> {
    if delta.is_nan() || delta <= 0.0 {
        bail!("--delta must be positive");
    }
    let pair = TestFunctionPair::fejer(delta);
    let est = weighted_one_level(&RMTConfig { n, samples, r, seed, pair })?;
    Ok(json!({
        "estimate": num(est.weighted_mean),
        "std_error": num(est.std_error),
        "reference": num(est.reference),
        "z_score": num(est.z_score),
        "effective_samples": num(est.effective_samples),
        "config": {"N": n, "samples": samples, "r": r, "delta": num(delta), "seed": seed},
    }))
}

/// Prime sum against its main term.
pub fn lemma41_json(n: u32, big_r: f64, delta: f64, limit: u64) -> Result<Value> {
    if delta.is_nan() || delta <= 0.0 {
        bail!("--delta must be positive");
    }
    let table = sieve(limit)?;
    let s = lemma41_partial_sum(n, big_r, &TestFunctionPair::fejer(delta), &table)?;
    Ok(json!({
        "lhs": num(s.lhs),
        "rhs": num(s.rhs),
        "rel_error": num(s.rel_error),
        "config": {"n": n, "R": num(big_r), "delta": num(delta), "limit": limit, "primes": table.primes.len()},
    }))
}
