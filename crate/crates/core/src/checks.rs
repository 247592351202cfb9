//! Seeded invariance suites, reported property by property.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gppredict::{gp_conditional_normal, gp_predict, rbf_kernel, GpDesign, GpParams, GpPrior};
use crate::groups::{gn_act_data, gn_act_params, gn_compose, gn_inverse, gp_act, GpGroupElement, GroupElementN};
use crate::mvnpredict::{mvn_predict_logdensity, MvnPredictorKind};
use crate::numcore::{mvn_logpdf, sample_mvn, MvnParams, ObservationSet, RandomStream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub suite: String,
    pub property: String,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn new(suite: &str, property: impl Into<String>, errors: &[f64], tolerance: f64) -> Self {
        let max_error = errors.iter().copied().fold(0.0, f64::max);
        let passed = errors.iter().all(|e| *e <= tolerance);
        Self { suite: suite.into(), property: property.into(), cases: errors.len(), max_error, tolerance, passed }
    }
}

fn random_gn(rng: &mut RandomStream, d: usize) -> GroupElementN {
    let v = DMatrix::from_fn(d, d, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => rng.random_range(0.3..3.0),
        std::cmp::Ordering::Less => rng.random_range(-2.0..2.0),
        std::cmp::Ordering::Greater => 0.0,
    });
    let m = DVector::from_fn(d, |_, _| rng.random_range(-5.0..5.0));
    GroupElementN::new(v, m).expect("positive diagonal")
}

fn random_spatial_design(rng: &mut RandomStream, n: usize, lengthscale: f64) -> Result<GpDesign> {
    let mut point = |_: usize, j: usize| if j == 0 { 1.0 } else { rng.random_range(0.0..1.0) };
    let train = DMatrix::from_fn(n, 3, &mut point);
    let pred = DMatrix::from_fn(1, 3, &mut point);
    GpDesign::new(train, pred, lengthscale)
}

fn group_suite(seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = RandomStream::new(seed);
    let (mut assoc, mut inverse, mut likelihood) = (Vec::new(), Vec::new(), Vec::new());
    for case in 0..100 {
        let d = 2 + case % 2;
        let (g1, g2, g3) = (random_gn(&mut rng, d), random_gn(&mut rng, d), random_gn(&mut rng, d));
        let left = gn_compose(&gn_compose(&g3, &g2)?, &g1)?;
        let right = gn_compose(&g3, &gn_compose(&g2, &g1)?)?;
        assoc.push((left.v() - right.v()).amax().max((left.m() - right.m()).amax()) / (1.0 + left.m().amax()));
        let id = gn_compose(&gn_inverse(&g1), &g1)?;
        inverse.push((id.v() - DMatrix::identity(d, d)).amax().max(id.m().amax()));

        let theta = gn_act_params(&random_gn(&mut rng, d), &MvnParams::standard(d))?;
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let moved = mvn_logpdf(&g1.act_point(&x)?, &gn_act_params(&g1, &theta)?)? + g1.log_det();
        likelihood.push((moved - mvn_logpdf(&x, &theta)?).abs());
    }
    Ok(vec![
        CheckResult::new("groups", "G_N composition is associative", &assoc, 1e-12),
        CheckResult::new("groups", "G_N inverse composes to identity", &inverse, 1e-12),
        CheckResult::new("groups", "normal likelihood invariant under G_N", &likelihood, 1e-9),
    ])
}

/// `x ↦ P V P x + P m` with `P` the coordinate swap: the lower-triangular
/// conjugate of an upper-triangular element.
fn swapped_act(g: &GroupElementN, p: &[f64]) -> Vec<f64> {
    let (v, m) = (g.v(), g.m());
    vec![v[(1, 1)] * p[0] + m[1], v[(0, 1)] * p[0] + v[(0, 0)] * p[1] + m[0]]
}

fn mvn_suite(seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = RandomStream::new(seed);
    let mut errors: Vec<Vec<f64>> = vec![Vec::new(); MvnPredictorKind::ALL.len()];
    for case in 0..50u64 {
        let g = random_gn(&mut rng, 2);
        let obs = sample_mvn(&MvnParams::standard(2), 5, &mut RandomStream::new(seed).substream(case))?;
        let x = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        let gobs = gn_act_data(&g, &obs)?;
        let gx = g.act_point(&x)?;
        let sobs = ObservationSet::from_rows(&(0..obs.n()).map(|i| swapped_act(&g, &obs.row(i))).collect::<Vec<_>>())?;
        let sx = swapped_act(&g, &x);
        for (k, kind) in MvnPredictorKind::ALL.into_iter().enumerate() {
            let base = mvn_predict_logdensity(kind, &obs, &x)?.log_density;
            let moved = if kind == MvnPredictorKind::RightInvariantSwapped {
                mvn_predict_logdensity(kind, &sobs, &sx)?.log_density
            } else {
                mvn_predict_logdensity(kind, &gobs, &gx)?.log_density
            };
            errors[k].push((moved + g.log_det() - base).abs());
        }
    }
    Ok(MvnPredictorKind::ALL
        .into_iter()
        .zip(errors)
        .map(|(kind, errs)| {
            let group = if kind == MvnPredictorKind::RightInvariantSwapped { "coordinate-swapped G_N" } else { "G_N" };
            CheckResult::new("mvnpredict", format!("{kind} predictive invariant under {group}"), &errs, 1e-9)
        })
        .collect())
}

fn gp_suite(seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = RandomStream::new(seed);
    let (mut joint, mut conditional, mut loc, mut scale) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for case in 0..20u64 {
        let design = random_spatial_design(&mut rng, 7, 0.8)?;
        let params = GpParams::new(DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0)), rng.random_range(0.5..2.0))?;
        let g = GpGroupElement::new(rng.random_range(0.3..3.0), DVector::from_fn(3, |_, _| rng.random_range(-2.0..2.0)))?;

        let x = design.stacked_features();
        let joint_params = |p: &GpParams| -> Result<MvnParams> {
            let cov = rbf_kernel(&x, &x, design.lengthscale()) * (p.sigma_y() * p.sigma_y());
            MvnParams::from_covariance(&x * p.beta(), &cov)
        };
        let draw = sample_mvn(&joint_params(&params)?, 1, &mut RandomStream::new(seed).substream(case))?.row(0);
        let y = DVector::from_column_slice(&draw[..7]);
        let ys = DVector::from_column_slice(&draw[7..]);
        let acted = gp_act(&g, design.train_x(), &y, design.pred_x(), &ys)?;
        let gparams = g.act_params(&params)?;

        let before = mvn_logpdf(&draw, &joint_params(&params)?)?;
        let stacked: Vec<f64> = acted.y.iter().chain(acted.y_star.iter()).copied().collect();
        let after = mvn_logpdf(&stacked, &joint_params(&gparams)?)? + 8.0 * g.a().ln();
        joint.push((before - after).abs());

        let cond = |t: &DVector<f64>, target: &DVector<f64>, p: &GpParams| -> Result<f64> {
            let (mean, cov) = gp_conditional_normal(&design, t, p)?;
            mvn_logpdf(target.as_slice(), &MvnParams::from_covariance(mean, &cov)?)
        };
        conditional.push((cond(&y, &ys, &params)? - cond(&acted.y, &acted.y_star, &gparams)? - g.a().ln()).abs());

        let base = gp_predict(&design, &y, GpPrior::RightInvariant)?;
        let at_loc = gp_act(&g, design.train_x(), &y, design.pred_x(), base.loc())?;
        let moved = gp_predict(&design, &at_loc.y, GpPrior::RightInvariant)?;
        loc.push((moved.loc() - &at_loc.y_star).amax() / (1.0 + at_loc.y_star.amax()));
        scale.push((moved.scale() - base.scale() * (g.a() * g.a())).amax() / moved.scale().amax());
    }
    Ok(vec![
        CheckResult::new("groups", "GP joint density picks up a^(n+m) under G_GP", &joint, 1e-8),
        CheckResult::new("gppredict", "GP conditional density invariant under G_GP", &conditional, 1e-8),
        CheckResult::new("gppredict", "GP predictive location equivariant under G_GP", &loc, 1e-9),
        CheckResult::new("gppredict", "GP predictive scale transforms by a²", &scale, 1e-9),
    ])
}

/// Runs every suite with substreams of `seed`.
pub fn run_invariance_checks(seed: u64) -> Result<Vec<CheckResult>> {
    let root = RandomStream::new(seed);
    let derive = |i: u64| root.substream(i).next_u64();
    let mut results = group_suite(derive(0))?;
    results.extend(mvn_suite(derive(1))?);
    results.extend(gp_suite(derive(2))?);
    Ok(results)
}
