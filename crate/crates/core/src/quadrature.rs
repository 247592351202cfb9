//! Gauss–Legendre rules and the tangent map used for integrals over the whole
//! real line.

use std::f64::consts::{FRAC_PI_2, PI};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_interval(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|v| v * half).collect(),
    )
}

/// Rule for `∫_ℝ f(x) dx` through `x = center + scale·tan(t)`.
///
/// Returns points `x` and weights that already include the Jacobian
/// `scale·sec²(t)`. Accurate for integrands with algebraic tails.
pub fn tangent_rule(n: usize, center: f64, scale: f64) -> (Vec<f64>, Vec<f64>) {
    let (t, w) = gauss_legendre_interval(n, -FRAC_PI_2, FRAC_PI_2);
    t.iter()
        .zip(&w)
        .map(|(&t, &w)| {
            let c = t.cos();
            (center + scale * t.tan(), w * scale / (c * c))
        })
        .unzip()
}

/// Stable log-sum-exp of weighted log values: `log Σ wᵢ exp(lᵢ)`.
pub fn log_weighted_sum(logs: &[f64], weights: &[f64]) -> f64 {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let s: f64 = logs.iter().zip(weights).map(|(l, w)| w * (l - max).exp()).sum();
    max + s.ln()
}
