//! Adaptive Gauss–Legendre quadrature.
//!
//! Each interval is integrated with a fixed-order rule and with the same rule
//! on its two halves; the interval is accepted when the two estimates agree to
//! the requested tolerance, otherwise both halves recurse.

use std::sync::OnceLock;

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Computes the rule by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussRule { nodes, weights }
    }

    /// Applies the rule to `[a, b]`.
    pub fn apply<F: Fn(f64) -> f64 + ?Sized>(&self, f: &F, a: f64, b: f64) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + h * x);
        }
        s * h
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// The shared 20-point rule.
pub fn rule20() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::new(20))
}

/// Tolerances for [`integrate`].
#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { rel_tol: 1e-12, abs_tol: 1e-15, max_depth: 40 }
    }
}

/// Value, error estimate and convergence flag of an integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

impl std::ops::Add for QuadResult {
    type Output = QuadResult;
    fn add(self, o: QuadResult) -> QuadResult {
        QuadResult {
            value: self.value + o.value,
            error: self.error + o.error,
            converged: self.converged && o.converged,
        }
    }
}

/// `∫_a^b f` by adaptive bisection with the 20-point rule.
pub fn integrate<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64, opts: QuadOptions) -> QuadResult {
    let rule = rule20();
    let whole = rule.apply(f, a, b);
    let mut budget = MAX_INTERVALS;
    recurse(f, rule, a, b, whole, opts, 0, &mut budget)
}

/// Cap on bisections per call; a noisy integrand otherwise costs `2^max_depth` evaluations.
const MAX_INTERVALS: usize = 1 << 16;

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    rule: &GaussRule,
    a: f64,
    b: f64,
    whole: f64,
    opts: QuadOptions,
    depth: u32,
    budget: &mut usize,
) -> QuadResult {
    let m = 0.5 * (a + b);
    let left = rule.apply(f, a, m);
    let right = rule.apply(f, m, b);
    let refined = left + right;
    let err = (refined - whole).abs();
    if err <= opts.abs_tol.max(opts.rel_tol * refined.abs()) {
        return QuadResult { value: refined, error: err, converged: true };
    }
    if depth >= opts.max_depth || *budget == 0 {
        return QuadResult { value: refined, error: err, converged: false };
    }
    // Each half gets the full relative tolerance but half the absolute one.
    let sub = QuadOptions { abs_tol: 0.5 * opts.abs_tol, ..opts };
    *budget -= 1;
    let lo = recurse(f, rule, a, m, left, sub, depth + 1, budget);
    lo + recurse(f, rule, m, b, right, sub, depth + 1, budget)
}

/// `∫_a^b f` split into panels of width at most `panel`, each integrated adaptively.
///
/// Suited to long oscillatory ranges. Panel sums are accumulated with
/// Neumaier compensation.
pub fn integrate_panels<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    panel: f64,
    opts: QuadOptions,
) -> QuadResult {
    assert!(panel > 0.0);
    let n = ((b - a) / panel).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    let per_panel = QuadOptions { abs_tol: opts.abs_tol / n as f64, ..opts };
    let mut sum = NeumaierSum::default();
    let mut error = 0.0;
    let mut converged = true;
    for i in 0..n {
        let lo = a + h * i as f64;
        let hi = if i + 1 == n { b } else { a + h * (i + 1) as f64 };
        let r = integrate(f, lo, hi, per_panel);
        sum.add(r.value);
        error += r.error;
        converged &= r.converged;
    }
    QuadResult { value: sum.total(), error, converged }
}

/// Compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}
