//! Next-sample predictive densities for the `d`-dimensional normal family.
//!
//! With `x̄` the sample mean and `S` the scatter matrix of `n` observations:
//!
//! | kind                   | density                                        |
//! |------------------------|------------------------------------------------|
//! | `IndependenceJeffreys` | `t_{n−d}(x̄, (n+1)/(n(n−d)) S)`                 |
//! | `Jeffreys`             | `t_{n−d+1}(x̄, (n+1)/(n(n−d+1)) S)`             |
//! | `PluginUnbiased`       | `N(x̄, S/(n−1))`                                |
//! | `PluginMLE`            | `N(x̄, S/n)`                                    |
//! | `RightInvariant`       | Gram-determinant closed form, `d = 2` only     |
//!
//! The right-invariant density for `d = 2`, with `u`, `v` the two coordinate
//! columns and `G(·)` a Gram matrix, is
//!
//! ```text
//! q(x*) = (n−2)/(2π) · (n+1)^((n−1)/2) / n^((n−2)/2)
//!         · det G(v, 1) · det G(u, v, 1)^((n−2)/2)
//!         · det G((u;u*), (v;v*), 1)^(−(n−1)/2) / det G((v;v*), 1)
//! ```

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::{
    gram_logdet, mvn_logpdf, mvt_logpdf, sample_stats, MvnParams, ObservationSet, SampleStats,
    StudentTParams, LN_2PI,
};
use crate::quadrature::tangent_rule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MvnPredictorKind {
    RightInvariant,
    RightInvariantSwapped,
    Jeffreys,
    IndependenceJeffreys,
    PluginUnbiased,
    PluginMLE,
}

impl MvnPredictorKind {
    pub const ALL: [MvnPredictorKind; 6] = [
        MvnPredictorKind::RightInvariant,
        MvnPredictorKind::RightInvariantSwapped,
        MvnPredictorKind::IndependenceJeffreys,
        MvnPredictorKind::Jeffreys,
        MvnPredictorKind::PluginUnbiased,
        MvnPredictorKind::PluginMLE,
    ];

    /// Short tag used in configs and result tables.
    pub fn tag(self) -> &'static str {
        match self {
            MvnPredictorKind::RightInvariant => "R",
            MvnPredictorKind::RightInvariantSwapped => "RSwapped",
            MvnPredictorKind::Jeffreys => "J",
            MvnPredictorKind::IndependenceJeffreys => "IJ",
            MvnPredictorKind::PluginUnbiased => "unb",
            MvnPredictorKind::PluginMLE => "MLE",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag().eq_ignore_ascii_case(tag))
    }

    /// Whether the procedure is defined after `n` observations in dimension `d`.
    pub fn is_defined(self, n: usize, d: usize) -> bool {
        match self {
            MvnPredictorKind::RightInvariant | MvnPredictorKind::RightInvariantSwapped => d == 2 && n > d,
            MvnPredictorKind::Jeffreys | MvnPredictorKind::IndependenceJeffreys => n > d,
            MvnPredictorKind::PluginUnbiased | MvnPredictorKind::PluginMLE => n >= 2 && n > d,
        }
    }
}

impl std::fmt::Display for MvnPredictorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Log predictive density, or `well_defined = false` (with a NaN density) when
/// the procedure is undefined for the observation count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictiveEvaluation {
    pub log_density: f64,
    pub well_defined: bool,
}

impl PredictiveEvaluation {
    pub fn defined(log_density: f64) -> Self {
        Self { log_density, well_defined: true }
    }

    pub fn undefined() -> Self {
        Self { log_density: f64::NAN, well_defined: false }
    }
}

pub fn mvn_predict_logdensity(
    kind: MvnPredictorKind,
    obs: &ObservationSet,
    xstar: &[f64],
) -> Result<PredictiveEvaluation> {
    let stats = sample_stats(obs)?;
    mvn_predict_logdensity_with_stats(kind, obs, &stats, xstar)
}

/// As [`mvn_predict_logdensity`] with precomputed sufficient statistics.
pub fn mvn_predict_logdensity_with_stats(
    kind: MvnPredictorKind,
    obs: &ObservationSet,
    stats: &SampleStats,
    xstar: &[f64],
) -> Result<PredictiveEvaluation> {
    let (n, d) = (obs.n(), obs.d());
    if xstar.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: xstar.len() });
    }
    if matches!(kind, MvnPredictorKind::RightInvariant | MvnPredictorKind::RightInvariantSwapped) && d != 2 {
        return Err(Error::UnsupportedDimension { predictor: kind.tag(), dim: d });
    }
    if !kind.is_defined(n, d) {
        return Ok(PredictiveEvaluation::undefined());
    }
    let nf = n as f64;
    let df = d as f64;
    let value = match kind {
        MvnPredictorKind::RightInvariant => right_invariant_logdensity(obs, xstar)?,
        MvnPredictorKind::RightInvariantSwapped => {
            right_invariant_logdensity(&obs.swap_columns(0, 1), &[xstar[1], xstar[0]])?
        }
        MvnPredictorKind::IndependenceJeffreys => {
            student_t(nf - df, (nf + 1.0) / (nf * (nf - df)), stats, xstar)?
        }
        MvnPredictorKind::Jeffreys => {
            student_t(nf - df + 1.0, (nf + 1.0) / (nf * (nf - df + 1.0)), stats, xstar)?
        }
        MvnPredictorKind::PluginUnbiased => plugin(1.0 / (nf - 1.0), stats, xstar)?,
        MvnPredictorKind::PluginMLE => plugin(1.0 / nf, stats, xstar)?,
    };
    Ok(PredictiveEvaluation::defined(value))
}

fn student_t(nu: f64, factor: f64, stats: &SampleStats, xstar: &[f64]) -> Result<f64> {
    let params = StudentTParams::new(nu, stats.mean.clone(), &stats.scatter * factor)?;
    mvt_logpdf(xstar, &params)
}

fn plugin(factor: f64, stats: &SampleStats, xstar: &[f64]) -> Result<f64> {
    let sigma: DMatrix<f64> = &stats.scatter * factor;
    let params = MvnParams::from_covariance(stats.mean.clone(), &sigma)?;
    mvn_logpdf(xstar, &params)
}

/// Centered coordinate columns of the observations extended by `xstar`.
///
/// Gram determinants involving the all-ones vector are unchanged by a common
/// shift of `u` and `v`, so centering costs nothing and avoids cancellation
/// for data far from the origin.
struct BivariateColumns {
    u: Vec<f64>,
    v: Vec<f64>,
    ones: Vec<f64>,
}

impl BivariateColumns {
    fn new(obs: &ObservationSet, xstar: &[f64]) -> Self {
        let n = obs.n();
        let data = obs.data();
        let mu = data.column(0).sum() / n as f64;
        let mv = data.column(1).sum() / n as f64;
        let mut u: Vec<f64> = data.column(0).iter().map(|x| x - mu).collect();
        let mut v: Vec<f64> = data.column(1).iter().map(|x| x - mv).collect();
        u.push(xstar[0] - mu);
        v.push(xstar[1] - mv);
        Self { u, v, ones: vec![1.0; n + 1] }
    }

    fn observed(&self) -> (&[f64], &[f64], &[f64]) {
        let n = self.u.len() - 1;
        (&self.u[..n], &self.v[..n], &self.ones[..n])
    }

    fn extended(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.u, &self.v, &self.ones)
    }
}

fn require_bivariate(obs: &ObservationSet, xstar: &[f64]) -> Result<()> {
    if obs.d() != 2 {
        return Err(Error::UnsupportedDimension { predictor: "R", dim: obs.d() });
    }
    if xstar.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: xstar.len() });
    }
    if obs.n() <= 2 {
        return Err(Error::InvalidInput(format!("need n > 2 observations, got {}", obs.n())));
    }
    Ok(())
}

/// Log of the unnormalized right-invariant predictive density
/// `det G((u;u*), (v;v*), 1)^(−(n−1)/2) / det G((v;v*), 1)`.
pub fn mvn_qr_unnormalized_logdensity(obs: &ObservationSet, xstar: &[f64]) -> Result<f64> {
    require_bivariate(obs, xstar)?;
    unnormalized(obs.n(), &BivariateColumns::new(obs, xstar))
}

fn unnormalized(n: usize, cols: &BivariateColumns) -> Result<f64> {
    let (u, v, ones) = cols.extended();
    let full = gram_logdet(&[u, v, ones])?;
    let second = gram_logdet(&[v, ones])?;
    Ok(-0.5 * (n as f64 - 1.0) * full - second)
}

fn right_invariant_logdensity(obs: &ObservationSet, xstar: &[f64]) -> Result<f64> {
    require_bivariate(obs, xstar)?;
    let n = obs.n();
    let nf = n as f64;
    let cols = BivariateColumns::new(obs, xstar);
    let (u, v, ones) = cols.observed();
    let log_gv = gram_logdet(&[v, ones])?;
    let log_guv = gram_logdet(&[u, v, ones])?;
    let log_const = (nf - 2.0).ln() - LN_2PI + 0.5 * (nf - 1.0) * (nf + 1.0).ln()
        - 0.5 * (nf - 2.0) * nf.ln();
    Ok(log_const + log_gv + 0.5 * (nf - 2.0) * log_guv + unnormalized(n, &cols)?)
}

/// Integral of the right-invariant predictive density over the whole plane.
///
/// Each axis uses a tangent-mapped Gauss–Legendre rule centered at `x̄` with
/// scale `√(S_ii/(n−2))`; the rule is doubled until successive results agree
/// to a tenth of `rel_tol`. If they still differ by more than `rel_tol` at the
/// finest level the check fails with `QuadratureNotConverged`.
pub fn mvn_qr_normalization_check(obs: &ObservationSet, rel_tol: f64) -> Result<f64> {
    let d = obs.d();
    if d != 2 {
        return Err(Error::UnsupportedDimension { predictor: "R", dim: d });
    }
    let n = obs.n();
    if n <= 2 {
        return Err(Error::InvalidInput(format!("need n > 2 observations, got {n}")));
    }
    let stats = sample_stats(obs)?;
    let scale: Vec<f64> = (0..2).map(|i| (stats.scatter[(i, i)] / (n as f64 - 2.0)).sqrt()).collect();

    let integrate = |points: usize| -> Result<f64> {
        let (xa, wa) = tangent_rule(points, stats.mean[0], scale[0]);
        let (xb, wb) = tangent_rule(points, stats.mean[1], scale[1]);
        let mut total = 0.0;
        for (a, wa) in xa.iter().zip(&wa) {
            for (b, wb) in xb.iter().zip(&wb) {
                let lq = right_invariant_logdensity(obs, &[*a, *b])?;
                total += wa * wb * lq.exp();
            }
        }
        Ok(total)
    };

    let mut points = 64;
    let mut previous = integrate(points)?;
    loop {
        points *= 2;
        let current = integrate(points)?;
        let diff = (current - previous).abs();
        if diff <= 0.1 * rel_tol * current.abs() {
            return Ok(current);
        }
        if points >= 1024 {
            if diff <= rel_tol * current.abs() {
                return Ok(current);
            }
            return Err(Error::QuadratureNotConverged { previous, current });
        }
        previous = current;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{gn_act_data, GroupElementN};
    use crate::numcore::{sample_mvn, RandomStream};
    use crate::quadrature::{gauss_legendre_interval, log_weighted_sum};
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn seeded_obs(seed: u64, n: usize, d: usize) -> ObservationSet {
        let sigma = if d == 2 {
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 2.0])
        } else {
            DMatrix::identity(d, d)
        };
        let p = MvnParams::from_covariance(DVector::from_element(d, 0.7), &sigma).unwrap();
        sample_mvn(&p, n, &mut RandomStream::new(seed)).unwrap()
    }

    #[test]
    fn tags_round_trip() {
        for k in MvnPredictorKind::ALL {
            assert_eq!(MvnPredictorKind::from_tag(k.tag()), Some(k));
        }
        assert_eq!(MvnPredictorKind::from_tag("nope"), None);
    }

    #[test]
    fn univariate_ij_two_points() {
        let obs = ObservationSet::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let e = mvn_predict_logdensity(MvnPredictorKind::IndependenceJeffreys, &obs, &[0.5]).unwrap();
        assert!(e.well_defined);
        let expected = (1.0 / (PI * 0.75f64.sqrt())).ln();
        assert!((e.log_density - expected).abs() < 1e-12);
    }

    /// Posterior predictive under the prior dσ/σ for d = 1, μ integrated
    /// analytically and σ by quadrature on a log grid.
    fn univariate_oracle(data: &[f64], xstar: f64) -> f64 {
        let log_marginal = |pts: &[f64]| -> f64 {
            let m = pts.len() as f64;
            let mean = pts.iter().sum::<f64>() / m;
            let s: f64 = pts.iter().map(|x| (x - mean).powi(2)).sum();
            // ∫ ∏ N(x_i | μ, σ²) dμ = (2πσ²)^(−(m−1)/2) m^(−1/2) exp(−s/2σ²); times 1/σ, dσ = σ dt
            let (t, w) = gauss_legendre_interval(8000, -12.0, 40.0);
            let logs: Vec<f64> = t
                .iter()
                .map(|&t| {
                    let s2 = (2.0 * t).exp();
                    -0.5 * (m - 1.0) * (2.0 * PI * s2).ln() - 0.5 * m.ln() - s / (2.0 * s2)
                })
                .collect();
            log_weighted_sum(&logs, &w)
        };
        let mut ext = data.to_vec();
        ext.push(xstar);
        log_marginal(&ext) - log_marginal(data)
    }

    #[test]
    fn univariate_ij_matches_quadrature_oracle() {
        let obs = ObservationSet::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let oracle = univariate_oracle(&[0.0, 1.0], 0.5);
        let e = mvn_predict_logdensity(MvnPredictorKind::IndependenceJeffreys, &obs, &[0.5]).unwrap();
        assert!((e.log_density - oracle).abs() < 1e-6, "{} vs {oracle}", e.log_density);

        let data = [0.3, -1.2, 2.2, 0.9, 1.4];
        let obs = ObservationSet::from_rows(&data.iter().map(|x| vec![*x]).collect::<Vec<_>>()).unwrap();
        for x in [-3.0, 0.0, 0.7, 5.0] {
            let e = mvn_predict_logdensity(MvnPredictorKind::IndependenceJeffreys, &obs, &[x]).unwrap();
            assert!((e.log_density - univariate_oracle(&data, x)).abs() < 1e-6);
        }
    }

    #[test]
    fn plugin_mle_mode_value() {
        let obs = seeded_obs(1, 3, 2);
        let stats = sample_stats(&obs).unwrap();
        let e = mvn_predict_logdensity(MvnPredictorKind::PluginMLE, &obs, stats.mean.as_slice()).unwrap();
        let expected = -LN_2PI - 0.5 * (&stats.scatter / 3.0).determinant().ln();
        assert!((e.log_density - expected).abs() < 1e-12);
    }

    #[test]
    fn definedness_rules() {
        let obs = seeded_obs(2, 2, 2);
        // n = 2 leaves the scatter singular in the plane, so every kind is undefined
        for kind in MvnPredictorKind::ALL {
            let e = mvn_predict_logdensity(kind, &obs, &[0.0, 0.0]).unwrap();
            assert!(!e.well_defined && e.log_density.is_nan());
        }
        assert!(MvnPredictorKind::PluginMLE.is_defined(2, 1));
        assert!(!MvnPredictorKind::PluginMLE.is_defined(1, 1));
        let obs3 = seeded_obs(2, 5, 3);
        assert!(matches!(
            mvn_predict_logdensity(MvnPredictorKind::RightInvariant, &obs3, &[0.0; 3]),
            Err(Error::UnsupportedDimension { .. })
        ));
        for n in 1..12 {
            for d in 1..4 {
                let nu_ij = n as f64 - d as f64;
                let nu_j = n as f64 - d as f64 + 1.0;
                assert_eq!(nu_j - nu_ij, 1.0);
            }
        }
    }

    #[test]
    fn collinear_data_is_singular() {
        let obs = ObservationSet::from_rows(&[vec![0.0, 0.0], vec![1.0, 2.0], vec![2.0, 4.0], vec![-1.0, -2.0]]).unwrap();
        assert!(matches!(
            mvn_predict_logdensity(MvnPredictorKind::RightInvariant, &obs, &[0.3, 0.1]),
            Err(Error::SingularGram { .. })
        ));
        let tilted = ObservationSet::from_rows(&[vec![0.1, 0.37], vec![1.1, 2.97], vec![2.1, 5.57]]).unwrap();
        assert!(matches!(
            mvn_predict_logdensity(MvnPredictorKind::RightInvariant, &tilted, &[0.0, 0.0]),
            Err(Error::SingularGram { .. })
        ));
    }

    #[test]
    fn unnormalized_gap_is_constant() {
        let obs = seeded_obs(3, 4, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let mut gaps = Vec::new();
        for _ in 0..20 {
            let x = [rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)];
            let q = mvn_predict_logdensity(MvnPredictorKind::RightInvariant, &obs, &x).unwrap().log_density;
            gaps.push(q - mvn_qr_unnormalized_logdensity(&obs, &x).unwrap());
        }
        for g in &gaps {
            assert!((g - gaps[0]).abs() < 1e-10);
        }
    }

    #[test]
    fn unnormalized_is_not_symmetric_in_coordinates() {
        let obs = ObservationSet::from_rows(&[vec![0.0, 0.2], vec![1.5, -0.4], vec![0.3, 2.5], vec![-0.8, 0.9]]).unwrap();
        let x = [0.4, 1.7];
        let a = mvn_qr_unnormalized_logdensity(&obs, &x).unwrap();
        let b = mvn_qr_unnormalized_logdensity(&obs.swap_columns(0, 1), &[x[1], x[0]]).unwrap();
        assert!((a - b).abs() > 1e-3);
    }

    #[test]
    fn unnormalized_shift_under_scaling() {
        let g = GroupElementN::new(DMatrix::identity(2, 2) * 2.0, DVector::zeros(2)).unwrap();
        for seed in 0..5 {
            let obs = seeded_obs(40 + seed, 6, 2);
            let x = [0.3 * seed as f64, -0.5];
            let before = mvn_qr_unnormalized_logdensity(&obs, &x).unwrap();
            let after = mvn_qr_unnormalized_logdensity(
                &gn_act_data(&g, &obs).unwrap(),
                &g.act_point(&x).unwrap(),
            )
            .unwrap();
            // det G(u,v,1) picks up 2⁴ and det G(v,1) picks up 2², independent of the data
            let expected = -(2.0 * 6.0) * 2f64.ln();
            assert!((after - before - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn normalization_check_values() {
        let obs3 = seeded_obs(5, 3, 2);
        let v3 = mvn_qr_normalization_check(&obs3, 2e-2).unwrap();
        assert!((v3 - 1.0).abs() < 2e-2, "{v3}");

        let obs10 = seeded_obs(6, 10, 2);
        let v10 = mvn_qr_normalization_check(&obs10, 1e-3).unwrap();
        assert!((v10 - 1.0).abs() < 1e-3, "{v10}");

        let g = GroupElementN::new(DMatrix::identity(2, 2) * 1000.0, DVector::zeros(2)).unwrap();
        let scaled = mvn_qr_normalization_check(&gn_act_data(&g, &obs10).unwrap(), 1e-3).unwrap();
        assert!((scaled - v10).abs() < 1e-3);
    }

    #[test]
    fn normalization_check_for_n5() {
        let obs = seeded_obs(7, 5, 2);
        let v = mvn_qr_normalization_check(&obs, 1e-3).unwrap();
        assert!((v - 1.0).abs() < 1e-3, "{v}");
    }

    #[test]
    fn tail_ordering() {
        let obs = seeded_obs(8, 6, 2);
        let stats = sample_stats(&obs).unwrap();
        let n = obs.n() as f64;
        let far: Vec<f64> = (0..2).map(|i| stats.mean[i] + 10.0 * (stats.scatter[(i, i)] / n).sqrt()).collect();
        let lq = |k| mvn_predict_logdensity(k, &obs, &far).unwrap().log_density;
        let plug = lq(MvnPredictorKind::PluginUnbiased).max(lq(MvnPredictorKind::PluginMLE));
        for k in [MvnPredictorKind::RightInvariant, MvnPredictorKind::IndependenceJeffreys, MvnPredictorKind::Jeffreys] {
            assert!(lq(k) > plug, "{k}");
        }
    }

    #[test]
    fn predictive_invariance_all_kinds() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        for trial in 0..50 {
            let v = DMatrix::from_row_slice(
                2,
                2,
                &[rng.random_range(0.3..3.0), rng.random_range(-2.0..2.0), 0.0, rng.random_range(0.3..3.0)],
            );
            let g = GroupElementN::new(v, DVector::from_fn(2, |_, _| rng.random_range(-5.0..5.0))).unwrap();
            let obs = seeded_obs(100 + trial, 5, 2);
            let x = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let gobs = gn_act_data(&g, &obs).unwrap();
            let gx = g.act_point(&x).unwrap();
            for kind in MvnPredictorKind::ALL {
                if kind == MvnPredictorKind::RightInvariantSwapped {
                    continue;
                }
                let a = mvn_predict_logdensity(kind, &gobs, &gx).unwrap().log_density + g.log_det();
                let b = mvn_predict_logdensity(kind, &obs, &x).unwrap().log_density;
                assert!((a - b).abs() < 1e-9, "{kind}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn swapped_variant_invariant_under_lower_triangular_group() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let kind = MvnPredictorKind::RightInvariantSwapped;
        let mut upper_gap: f64 = 0.0;
        for trial in 0..50 {
            let (a, b, c) = (rng.random_range(0.3..3.0), rng.random_range(-2.0..2.0), rng.random_range(0.3..3.0));
            let shift = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
            let obs = seeded_obs(200 + trial, 5, 2);
            let x = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let act = |p: &[f64], lower: bool| -> Vec<f64> {
                if lower {
                    vec![a * p[0] + shift[0], b * p[0] + c * p[1] + shift[1]]
                } else {
                    vec![a * p[0] + b * p[1] + shift[0], c * p[1] + shift[1]]
                }
            };
            let rows = |lower: bool| -> ObservationSet {
                ObservationSet::from_rows(&(0..obs.n()).map(|i| act(&obs.row(i), lower)).collect::<Vec<_>>()).unwrap()
            };
            let base = mvn_predict_logdensity(kind, &obs, &x).unwrap().log_density;
            let lower = mvn_predict_logdensity(kind, &rows(true), &act(&x, true)).unwrap().log_density + (a * c).ln();
            assert!((lower - base).abs() < 1e-9, "{lower} vs {base}");
            let upper = mvn_predict_logdensity(kind, &rows(false), &act(&x, false)).unwrap().log_density + (a * c).ln();
            upper_gap = upper_gap.max((upper - base).abs());
        }
        assert!(upper_gap > 1e-3);
    }

    #[test]
    fn swapped_variant_differs() {
        let obs = seeded_obs(9, 4, 2);
        let x = [1.0, -0.5];
        let a = mvn_predict_logdensity(MvnPredictorKind::RightInvariant, &obs, &x).unwrap().log_density;
        let b = mvn_predict_logdensity(MvnPredictorKind::RightInvariantSwapped, &obs, &x).unwrap().log_density;
        assert!((a - b).abs() > 1e-3);
    }
}
