//! Independent numeric oracles shared by the integration tests and the
//! acceptance harness.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use predrisk::gppredict::{rbf_kernel, GpDesign};
use predrisk::numcore::ObservationSet;
use predrisk::quadrature::{gauss_legendre_interval, log_weighted_sum, tangent_rule};

/// Log of `∫∫∫ ∫ ∏ N(xᵢ | μ, UUᵀ) dμ · a⁻¹c⁻² da db dc` for bivariate points,
/// where `U = [[a, b], [0, c]]`, with the μ-integral done in closed form and
/// the other three by quadrature.
///
/// Substituting `a = eˢ`, `c = eᵗ`, `b = r·c` turns the measure into
/// `ds dr dt` and the integrand into
/// `(2π)^(−(N−1)) N⁻¹ e^(−(N−1)(s+t)) exp(−½[Q(r)e^(−2s) + S₂₂e^(−2t)])`
/// with `Q(r) = S₁₁ − 2rS₁₂ + r²S₂₂`.
pub fn right_haar_log_evidence(points: &[[f64; 2]], nodes: usize) -> f64 {
    let big_n = points.len() as f64;
    let mean = [0, 1].map(|j| points.iter().map(|p| p[j]).sum::<f64>() / big_n);
    let mut s = [[0.0; 2]; 2];
    for p in points {
        for i in 0..2 {
            for j in 0..2 {
                s[i][j] += (p[i] - mean[i]) * (p[j] - mean[j]);
            }
        }
    }
    let k = big_n - 1.0;
    let q = |r: f64| s[0][0] - 2.0 * r * s[0][1] + r * r * s[1][1];
    let r0 = s[0][1] / s[1][1];
    let width = (q(r0) / s[1][1]).sqrt();
    let (rs, rw) = tangent_rule(nodes, r0, width);
    let (offsets, ow) = gauss_legendre_interval(nodes, -6.0, 14.0);
    let t0 = 0.5 * (s[1][1] / k).ln();

    let mut logs = Vec::with_capacity(nodes * nodes * nodes);
    let mut weights = Vec::with_capacity(nodes * nodes * nodes);
    for (&r, &wr) in rs.iter().zip(&rw) {
        let qr = q(r);
        let s0 = 0.5 * (qr / k).ln();
        for (&ds, &ws) in offsets.iter().zip(&ow) {
            let sv = s0 + ds;
            for (&dt, &wt) in offsets.iter().zip(&ow) {
                let tv = t0 + dt;
                logs.push(-k * (sv + tv) - 0.5 * (qr * (-2.0 * sv).exp() + s[1][1] * (-2.0 * tv).exp()));
                weights.push(wr * ws * wt);
            }
        }
    }
    -k * (2.0 * std::f64::consts::PI).ln() - big_n.ln() + log_weighted_sum(&logs, &weights)
}

/// Right-invariant posterior predictive log density by direct integration.
pub fn mvn_right_invariant_oracle(obs: &ObservationSet, xstar: [f64; 2], nodes: usize) -> f64 {
    let mut pts: Vec<[f64; 2]> = (0..obs.n()).map(|i| [obs.data()[(i, 0)], obs.data()[(i, 1)]]).collect();
    let denominator = right_haar_log_evidence(&pts, nodes);
    pts.push(xstar);
    right_haar_log_evidence(&pts, nodes) - denominator
}

/// GP predictive log density of one target under `dβ dσ/σ^(1+extra_power)`,
/// β integrated in closed form with dense inverses and `log σ` by quadrature.
pub fn gp_quadrature_oracle(design: &GpDesign, y: &DVector<f64>, y_star: f64, extra_power: f64) -> f64 {
    let log_marginal = |x: &DMatrix<f64>, t: &DVector<f64>| -> f64 {
        let k = rbf_kernel(x, x, design.lengthscale());
        let kinv = k.clone().try_inverse().unwrap();
        let m = x.transpose() * &kinv * x;
        let minv = m.clone().try_inverse().unwrap();
        let bhat = &minv * x.transpose() * &kinv * t;
        let form = (t.transpose() * &kinv * t)[(0, 0)] - (bhat.transpose() * &m * &bhat)[(0, 0)];
        let (count, p) = (t.len() as f64, x.ncols() as f64);
        let base = -0.5 * k.determinant().ln() - 0.5 * m.determinant().ln();
        let (grid, w) = gauss_legendre_interval(6000, -15.0, 30.0);
        let logs: Vec<f64> = grid
            .iter()
            .map(|&ls| {
                let s2 = (2.0 * ls).exp();
                0.5 * (p - count) * (2.0 * std::f64::consts::PI * s2).ln() - form / (2.0 * s2) - extra_power * ls
            })
            .collect();
        base + log_weighted_sum(&logs, &w)
    };
    let x_full = design.stacked_features();
    let mut t_full = DVector::zeros(design.n() + 1);
    t_full.rows_mut(0, design.n()).copy_from(y);
    t_full[design.n()] = y_star;
    log_marginal(&x_full, &t_full) - log_marginal(design.train_x(), y)
}
