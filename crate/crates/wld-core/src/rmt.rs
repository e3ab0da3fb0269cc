//! Monte Carlo one-level statistics of Haar-random `SO(2N)` weighted by `det(I − U)^r`.
//!
//! Every sample draws from its own ChaCha stream keyed by `(seed, index)`, and the
//! per-sample results are reduced in index order, so the estimate does not depend
//! on how rayon schedules the work.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

use crate::quad::{integrate, integrate_panels, QuadOptions};
use crate::kernels::{density_functional, Family, Kernel, KernelError, KernelId, TestFunctionPair};

#[derive(Debug, Error, PartialEq)]
pub enum RmtError {
    #[error("N must be at least 2, got {0}")]
    SmallN(usize),
    #[error("need at least one sample")]
    NoSamples,
    #[error("all sampled weights vanish")]
    ZeroWeight,
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Simulation parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RMTConfig {
    /// Half-dimension; matrices are `2N × 2N`.
    pub n: usize,
    pub samples: usize,
    pub r: u32,
    pub seed: u64,
    pub pair: TestFunctionPair,
}

/// Weighted mean of the statistic, its jackknife error and the kernel prediction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RMTEstimate {
    pub weighted_mean: f64,
    pub std_error: f64,
    pub reference: f64,
    pub z_score: f64,
    /// Kish effective sample size `(Σw)²/Σw²`.
    pub effective_samples: f64,
}

/// Per-sample output: `log det(I − U)` and `Σ_{±θ} Φ(θN/π)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Draw {
    pub log_det: f64,
    pub stat: f64,
}

const JACKKNIFE_BLOCKS: usize = 100;

/// The RNG for sample `index` under `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Haar-random element of `SO(2N)`: QR of a Gaussian matrix with the signs of
/// `diag R` absorbed into `Q`, then a reflection of the first row when `det = −1`.
pub fn sample_so_even(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    assert!(n >= 2, "N must be at least 2");
    let d = 2 * n;
    loop {
        let g = DMatrix::<f64>::from_fn(d, d, |_, _| StandardNormal.sample(rng));
        let qr = g.qr();
        let r = qr.r();
        if (0..d).any(|i| r[(i, i)] == 0.0) {
            continue;
        }
        let mut q = qr.q();
        for j in 0..d {
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        if q.determinant() < 0.0 {
            q.row_mut(0).neg_mut();
        }
        return q;
    }
}

/// `cos θ_j` for the `N` eigenangle pairs, from the spectrum of `(U + Uᵀ)/2`.
///
/// Each cosine appears twice in that spectrum; consecutive sorted values are
/// averaged pairwise.
pub fn eigen_cosines(u: &DMatrix<f64>) -> Vec<f64> {
    let s = (u + u.transpose()) * 0.5;
    let mut ev: Vec<f64> = s.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev.chunks(2).map(|c| (0.5 * c.iter().sum::<f64>()).clamp(-1.0, 1.0)).collect()
}

/// `cos θ_j` read off the complex Schur form; independent of [`eigen_cosines`].
pub fn eigen_cosines_schur(u: &DMatrix<f64>) -> Vec<f64> {
    let ev = u.clone().complex_eigenvalues();
    let mut re: Vec<f64> = ev.iter().map(|z| z.re).collect();
    re.sort_by(f64::total_cmp);
    re.chunks(2).map(|c| 0.5 * c.iter().sum::<f64>()).collect()
}

/// Eigenangles in `[0, π]`, one per conjugate pair, ascending.
pub fn eigenangles(u: &DMatrix<f64>) -> Vec<f64> {
    let mut th: Vec<f64> = eigen_cosines(u).into_iter().map(f64::acos).collect();
    th.sort_by(f64::total_cmp);
    th
}

/// `log det(I − U) = Σ_j log(2 − 2cos θ_j)`.
pub fn log_det_i_minus(cosines: &[f64]) -> f64 {
    cosines.iter().map(|c| (2.0 - 2.0 * c).ln()).sum()
}

/// `det(I − U)^r`.
pub fn weight(cosines: &[f64], r: u32) -> f64 {
    if r == 0 {
        return 1.0;
    }
    (r as f64 * log_det_i_minus(cosines)).exp()
}

/// One draw: sample, eigenangles, log-determinant, one-level statistic.
pub fn draw(n: usize, pair: &TestFunctionPair, seed: u64, index: u64) -> Draw {
    let mut rng = sample_rng(seed, index);
    let u = sample_so_even(n, &mut rng);
    let cos = eigen_cosines(&u);
    let scale = n as f64 / PI;
    // Both members ±θ of each pair are zeros, and Φ is even.
    let stat = 2.0 * cos.iter().map(|c| pair.phi(c.acos() * scale)).sum::<f64>();
    Draw { log_det: log_det_i_minus(&cos), stat }
}

/// All draws for a configuration, in sample order.
pub fn draws(n: usize, samples: usize, pair: &TestFunctionPair, seed: u64) -> Result<Vec<Draw>, RmtError> {
    if n < 2 {
        return Err(RmtError::SmallN(n));
    }
    if samples == 0 {
        return Err(RmtError::NoSamples);
    }
    Ok((0..samples as u64).into_par_iter().map(|i| draw(n, pair, seed, i)).collect())
}

/// Ratio estimate `Σw·stat/Σw` with jackknife error over contiguous blocks,
/// plus the effective sample size.
pub fn weighted_ratio(draws: &[Draw], r: u32) -> Result<(f64, f64, f64), RmtError> {
    if draws.is_empty() {
        return Err(RmtError::NoSamples);
    }
    let rf = r as f64;
    let shift = if r == 0 {
        0.0
    } else {
        draws.iter().map(|d| rf * d.log_det).filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max)
    };
    if !shift.is_finite() {
        return Err(RmtError::ZeroWeight);
    }
    let nb = JACKKNIFE_BLOCKS.min(draws.len());
    let mut bw = vec![0.0; nb];
    let mut bwf = vec![0.0; nb];
    let mut sw2 = 0.0;
    for (i, d) in draws.iter().enumerate() {
        let w = if r == 0 { 1.0 } else { (rf * d.log_det - shift).exp() };
        let b = i * nb / draws.len();
        bw[b] += w;
        bwf[b] += w * d.stat;
        sw2 += w * w;
    }
    let sw: f64 = bw.iter().sum();
    let swf: f64 = bwf.iter().sum();
    if sw == 0.0 {
        return Err(RmtError::ZeroWeight);
    }
    let mean = swf / sw;
    let ess = sw * sw / sw2;
    if nb < 2 {
        return Ok((mean, 0.0, ess));
    }
    let loo: Vec<f64> = (0..nb).map(|b| (swf - bwf[b]) / (sw - bw[b])).collect();
    let avg = loo.iter().sum::<f64>() / nb as f64;
    let var = (nb - 1) as f64 / nb as f64 * loo.iter().map(|v| (v - avg).powi(2)).sum::<f64>();
    Ok((mean, var.sqrt(), ess))
}

/// `∫Φ·W_SO(even)^r`.
pub fn reference(r: u32, pair: &TestFunctionPair) -> Result<f64, RmtError> {
    let k = Kernel::new(KernelId::new(Family::SOeven, r), None)?;
    Ok(density_functional(&k, pair)?)
}

fn estimate_from(draws: &[Draw], r: u32, pair: &TestFunctionPair) -> Result<RMTEstimate, RmtError> {
    let (weighted_mean, std_error, effective_samples) = weighted_ratio(draws, r)?;
    let reference = reference(r, pair)?;
    let z_score = if std_error > 0.0 { (weighted_mean - reference) / std_error } else { f64::NAN };
    Ok(RMTEstimate { weighted_mean, std_error, reference, z_score, effective_samples })
}

/// Weighted one-level statistic for a single `r`.
pub fn weighted_one_level(config: &RMTConfig) -> Result<RMTEstimate, RmtError> {
    let d = draws(config.n, config.samples, &config.pair, config.seed)?;
    estimate_from(&d, config.r, &config.pair)
}

/// Same as [`weighted_one_level`] for several `r` on one shared set of matrices.
pub fn weighted_one_level_multi(
    n: usize,
    samples: usize,
    rs: &[u32],
    seed: u64,
    pair: &TestFunctionPair,
) -> Result<Vec<RMTEstimate>, RmtError> {
    let d = draws(n, samples, pair, seed)?;
    rs.iter().map(|&r| estimate_from(&d, r, pair)).collect()
}

/// Exact finite-`N` value of `E[w·Σ_{±θ}Φ(θN/π)]/E[w]` for `w = det(I − U)^r`.
///
/// Under that weight `x_j = cos θ_j` form a `β = 2` Jacobi ensemble with weight
/// `(1−x)^{r−1/2}(1+x)^{−1/2}`, so the one-point density in `θ` is
/// `(1 − cos θ)^r Σ_{k<N} q_k(cos θ)²` with `q_k` the orthonormal Jacobi polynomials.
/// Serves as a sampling-free reference for the Monte Carlo estimate at the same `N`.
pub fn jacobi_finite_n(n: usize, r: u32, pair: &TestFunctionPair) -> f64 {
    assert!(n >= 1);
    let (a, b) = (r as f64 - 0.5, -0.5);
    let s = a + b;
    // Monic recurrence p_{k+1} = (x − α_k)p_k − β_k p_{k−1}.
    let alpha: Vec<f64> = (0..n)
        .map(|k| {
            let t = 2.0 * k as f64 + s;
            if k == 0 { (b - a) / (s + 2.0) } else { (b * b - a * a) / (t * (t + 2.0)) }
        })
        .collect();
    let beta: Vec<f64> = (0..n)
        .map(|k| {
            let kf = k as f64;
            let t = 2.0 * kf + s;
            match k {
                0 => 0.0,
                // (1 + a + b) cancelled so that r = 0 is covered.
                1 => 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + s).powi(2) * (3.0 + s)),
                _ => 4.0 * kf * (kf + a) * (kf + b) * (kf + s) / (t * t * (t + 1.0) * (t - 1.0)),
            }
        })
        .collect();
    let rf = r as i32;
    // 1 − cos θ written as 2sin²(θ/2) to keep relative accuracy near 0.
    let w0 = |th: f64| (2.0 * (0.5 * th).sin().powi(2)).powi(rf);
    let h0 = integrate(&w0, 0.0, PI, QuadOptions::default()).value;
    let density = |th: f64| {
        let x = th.cos();
        let mut q_prev = 0.0;
        let mut q = 1.0 / h0.sqrt();
        let mut acc = q * q;
        for k in 0..n - 1 {
            let next = ((x - alpha[k]) * q - beta[k].sqrt() * q_prev) / beta[k + 1].sqrt();
            q_prev = q;
            q = next;
            acc += q * q;
        }
        w0(th) * acc
    };
    let scale = n as f64 / PI;
    let f = |th: f64| density(th) * pair.phi(th * scale);
    2.0 * integrate_panels(&f, 0.0, PI, PI / (2 * n) as f64, QuadOptions::default()).value
}
