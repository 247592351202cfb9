//! Monte Carlo estimation of predictive (Kullback–Leibler) risk.
//!
//! Each sample draws the observations and the targets jointly from the model
//! at the true parameter and scores `log p(y* | y, θ*) − log q(y*; y)`. Sample
//! `k` uses random substream `k`, and partial sums are kept per fixed block of
//! samples and merged in block order, so the estimate is bit-identical for any
//! shard count.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gppredict::{GpDesign, GpParams, GpPredictorKind, PreparedGp};
use crate::mvnpredict::{mvn_predict_logdensity_with_stats, MvnPredictorKind, PredictiveEvaluation};
use crate::numcore::{mvn_logpdf, sample_stats, MvnParams, ObservationSet, RandomStream, SampleStats};

/// Samples per partial-sum block.
pub const BLOCK_SIZE: u64 = 4096;

/// Largest tolerated fraction of samples on which a predictor is undefined.
pub const MAX_UNDEFINED_FRACTION: f64 = 1e-6;

/// Data-generating model together with its true parameter.
#[derive(Debug, Clone)]
pub enum Model {
    /// i.i.d. `N(μ, UUᵀ)`; one target sample.
    Mvn { theta: MvnParams },
    /// GP regression on the first `n` training points of the design; targets
    /// at every prediction point.
    Gp { design: GpDesign, params: GpParams },
}

impl Model {
    /// Number of target values per sample.
    pub fn m(&self) -> usize {
        match self {
            Model::Mvn { .. } => 1,
            Model::Gp { design, .. } => design.m(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PredictorTag {
    /// The true conditional itself; its risk is exactly zero.
    Oracle,
    Mvn(MvnPredictorKind),
    Gp(GpPredictorKind),
}

impl PredictorTag {
    pub fn label(self) -> String {
        match self {
            PredictorTag::Oracle => "oracle".into(),
            PredictorTag::Mvn(k) => k.tag().into(),
            PredictorTag::Gp(k) => k.tag().into(),
        }
    }
}

/// One simulated data set, as seen by a predictor.
pub enum Draw<'a> {
    Mvn {
        obs: &'a ObservationSet,
        stats: &'a SampleStats,
        target: &'a [f64],
    },
    Gp {
        prepared: &'a PreparedGp,
        y: &'a DVector<f64>,
        target: &'a DVector<f64>,
    },
}

/// A predictive procedure scored by the risk engine.
pub trait RiskScorer: Send + Sync {
    fn label(&self) -> String;

    /// Log predictive density of the draw's targets, or an undefined
    /// evaluation. Errors from degenerate data count as undefined samples.
    fn log_density(&self, draw: &Draw<'_>) -> Result<PredictiveEvaluation>;
}

struct BuiltinScorer(PredictorTag);

impl RiskScorer for BuiltinScorer {
    fn label(&self) -> String {
        self.0.label()
    }

    fn log_density(&self, draw: &Draw<'_>) -> Result<PredictiveEvaluation> {
        match (self.0, draw) {
            (PredictorTag::Mvn(kind), Draw::Mvn { obs, stats, target }) => {
                mvn_predict_logdensity_with_stats(kind, obs, stats, target)
            }
            (PredictorTag::Gp(kind), Draw::Gp { prepared, y, target }) => {
                prepared.predictive_logdensity(kind, y, target.as_slice()).map(PredictiveEvaluation::defined)
            }
            (PredictorTag::Oracle, _) => unreachable!("oracle is scored by the engine"),
            (tag, _) => Err(Error::InvalidSpec(format!("predictor {} does not match the model", tag.label()))),
        }
    }
}

/// Observation count, sample size and seed for a run; shared by every
/// predictor scored in that run.
#[derive(Debug, Clone)]
pub struct SamplingPlan {
    pub model: Model,
    pub n: usize,
    pub n_samples: u64,
    pub seed: u64,
    pub shards: u32,
}

impl SamplingPlan {
    pub fn m(&self) -> usize {
        self.model.m()
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub plan: SamplingPlan,
    pub predictor: PredictorTag,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    /// Mean per-sample log ratio, in nats.
    pub mean: f64,
    pub std_err: f64,
    pub n_samples: u64,
    pub n_undefined: u64,
}

/// Running `(count, mean, M2)` of per-sample terms.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        let weight = other.count as f64 / total as f64;
        self.mean += delta * weight;
        self.m2 += other.m2 + delta * delta * self.count as f64 * weight;
        self.count = total;
    }
}

#[derive(Debug, Clone)]
struct Partial {
    moments: Vec<Moments>,
    undefined: Vec<u64>,
}

impl Partial {
    fn new(k: usize) -> Self {
        Self { moments: vec![Moments::default(); k], undefined: vec![0; k] }
    }
}

/// Model-level precomputation shared by all samples.
#[allow(clippy::large_enum_variant)]
enum Sampler {
    Mvn { theta: MvnParams, n: usize },
    Gp { joint: MvnParams, prepared: PreparedGp, params: GpParams },
}

impl Sampler {
    fn new(model: &Model, n: usize) -> Result<Self> {
        match model {
            Model::Mvn { theta } => Ok(Sampler::Mvn { theta: theta.clone(), n }),
            Model::Gp { design, params } => {
                let sub = design.with_first_observations(n)?;
                if params.beta().len() != sub.p() {
                    return Err(Error::DimensionMismatch { expected: sub.p(), found: params.beta().len() });
                }
                let x = sub.stacked_features();
                let k = crate::gppredict::rbf_kernel(&x, &x, sub.lengthscale());
                let cov = k * (params.sigma_y() * params.sigma_y());
                let joint = MvnParams::from_covariance(&x * params.beta(), &cov)?;
                let prepared = PreparedGp::new(&sub)?;
                Ok(Sampler::Gp { joint, prepared, params: params.clone() })
            }
        }
    }

    /// Draws sample `index`, then calls `score` with the draw and the oracle
    /// log density.
    fn with_draw<T>(
        &self,
        root: &RandomStream,
        index: u64,
        buf: &mut Vec<f64>,
        score: impl FnOnce(&Draw<'_>, f64) -> Result<T>,
    ) -> Result<T> {
        let mut stream = root.substream(index);
        match self {
            Sampler::Mvn { theta, n } => {
                let d = theta.dim();
                buf.resize((n + 1) * d, 0.0);
                stream.fill_standard_normal(buf);
                let (u, mu) = (theta.u(), theta.mu());
                let point = |r: usize| -> Vec<f64> {
                    let z = &buf[r * d..(r + 1) * d];
                    (0..d).map(|i| mu[i] + (i..d).map(|j| u[(i, j)] * z[j]).sum::<f64>()).collect()
                };
                let obs = ObservationSet::new(DMatrix::from_fn(*n, d, |r, c| point(r)[c]))?;
                let target = point(*n);
                let stats = sample_stats(&obs)?;
                let oracle = mvn_logpdf(&target, theta)?;
                score(&Draw::Mvn { obs: &obs, stats: &stats, target: &target }, oracle)
            }
            Sampler::Gp { joint, prepared, params } => {
                let total = joint.dim();
                let n = prepared.design().n();
                buf.resize(total, 0.0);
                stream.fill_standard_normal(buf);
                let full = joint.mu() + joint.u() * DVector::from_column_slice(buf);
                let y = full.rows(0, n).into_owned();
                let target = full.rows(n, total - n).into_owned();
                let oracle = mvn_logpdf(target.as_slice(), &prepared.conditional_params(&y, params)?)?;
                score(&Draw::Gp { prepared, y: &y, target: &target }, oracle)
            }
        }
    }
}

fn is_degenerate(err: &Error) -> bool {
    matches!(
        err,
        Error::SingularGram { .. }
            | Error::NotPositiveDefinite { .. }
            | Error::DegenerateObservation { .. }
            | Error::SingularKernel
    )
}

fn check_plan(plan: &SamplingPlan) -> Result<()> {
    if plan.n_samples < 2 {
        return Err(Error::InvalidSpec("need at least two samples".into()));
    }
    if plan.shards == 0 || !plan.n_samples.is_multiple_of(plan.shards as u64) {
        return Err(Error::InvalidSpec(format!(
            "sample count {} is not divisible by shard count {}",
            plan.n_samples, plan.shards
        )));
    }
    match &plan.model {
        Model::Mvn { .. } if plan.n == 0 => Err(Error::InvalidSpec("need at least one observation".into())),
        Model::Gp { design, .. } if plan.n > design.n() => Err(Error::InvalidSpec(format!(
            "n = {} exceeds the {} training points of the design",
            plan.n,
            design.n()
        ))),
        _ => Ok(()),
    }
}

fn check_predictor(plan: &SamplingPlan, tag: PredictorTag) -> Result<()> {
    match (tag, &plan.model) {
        (PredictorTag::Oracle, _) => Ok(()),
        (PredictorTag::Mvn(kind), Model::Mvn { theta }) => {
            if kind.is_defined(plan.n, theta.dim()) {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!("{kind} is undefined for n = {}, d = {}", plan.n, theta.dim())))
            }
        }
        (PredictorTag::Gp(kind), Model::Gp { design, .. }) => {
            if plan.n > design.p() {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!("{kind} needs n > p = {}", design.p())))
            }
        }
        (tag, _) => Err(Error::InvalidSpec(format!("predictor {} does not match the model", tag.label()))),
    }
}

/// Scores every predictor on the same simulated samples. `None` entries
/// denote the oracle.
fn run(plan: &SamplingPlan, scorers: &[Option<&dyn RiskScorer>]) -> Result<Vec<RiskEstimate>> {
    check_plan(plan)?;
    let sampler = Sampler::new(&plan.model, plan.n)?;
    let root = RandomStream::new(plan.seed);
    let k = scorers.len();
    let n_blocks = plan.n_samples.div_ceil(BLOCK_SIZE);
    let shards = (plan.shards as u64).min(n_blocks);
    let per_shard = n_blocks.div_ceil(shards);

    let run_block = |block: u64| -> Result<Partial> {
        let mut partial = Partial::new(k);
        let mut buf = Vec::new();
        let start = block * BLOCK_SIZE;
        let end = (start + BLOCK_SIZE).min(plan.n_samples);
        for index in start..end {
            sampler.with_draw(&root, index, &mut buf, |draw, oracle| {
                for (j, scorer) in scorers.iter().enumerate() {
                    let Some(scorer) = scorer else {
                        partial.moments[j].push(if oracle.is_finite() { 0.0 } else { f64::NAN });
                        continue;
                    };
                    match scorer.log_density(draw) {
                        Ok(e) if e.well_defined && e.log_density.is_finite() => {
                            partial.moments[j].push(oracle - e.log_density)
                        }
                        Ok(_) => partial.undefined[j] += 1,
                        Err(err) if is_degenerate(&err) => partial.undefined[j] += 1,
                        Err(err) => return Err(err),
                    }
                }
                Ok(())
            })?;
        }
        Ok(partial)
    };

    let shard_partials: Vec<Result<Vec<Partial>>> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let first = s * per_shard;
            let last = ((s + 1) * per_shard).min(n_blocks);
            (first..last).map(run_block).collect()
        })
        .collect();

    let mut total = Partial::new(k);
    for shard in shard_partials {
        for block in shard? {
            for j in 0..k {
                total.moments[j].merge(&block.moments[j]);
                total.undefined[j] += block.undefined[j];
            }
        }
    }

    (0..k)
        .map(|j| {
            let undefined = total.undefined[j];
            if undefined as f64 > MAX_UNDEFINED_FRACTION * plan.n_samples as f64 {
                return Err(Error::TooManyUndefined { undefined, total: plan.n_samples });
            }
            let mom = total.moments[j];
            let var = if mom.count > 1 { mom.m2 / (mom.count - 1) as f64 } else { 0.0 };
            Ok(RiskEstimate {
                mean: mom.mean,
                std_err: (var / mom.count as f64).sqrt(),
                n_samples: plan.n_samples,
                n_undefined: undefined,
            })
        })
        .collect()
}

/// Risk of one built-in predictor.
pub fn estimate_risk(spec: &ExperimentSpec) -> Result<RiskEstimate> {
    Ok(estimate_risk_table(&spec.plan, &[spec.predictor])?.remove(0))
}

/// Risks of several built-in predictors evaluated on common random numbers.
/// Each cell equals what [`estimate_risk`] returns for that predictor alone.
pub fn estimate_risk_table(plan: &SamplingPlan, predictors: &[PredictorTag]) -> Result<Vec<RiskEstimate>> {
    for &tag in predictors {
        check_predictor(plan, tag)?;
    }
    let builtins: Vec<BuiltinScorer> = predictors.iter().map(|&t| BuiltinScorer(t)).collect();
    let scorers: Vec<Option<&dyn RiskScorer>> = predictors
        .iter()
        .zip(&builtins)
        .map(|(t, b)| if *t == PredictorTag::Oracle { None } else { Some(b as &dyn RiskScorer) })
        .collect();
    run(plan, &scorers)
}

/// Risks of arbitrary scorers on common random numbers.
pub fn estimate_risk_custom(plan: &SamplingPlan, scorers: &[&dyn RiskScorer]) -> Result<Vec<RiskEstimate>> {
    let wrapped: Vec<Option<&dyn RiskScorer>> = scorers.iter().map(|s| Some(*s)).collect();
    run(plan, &wrapped)
}

/// `log p(y* | y, θ*)` for the model's true parameter.
pub fn oracle_logscore(model: &Model, y: &[f64], ystar: &[f64]) -> Result<f64> {
    match model {
        Model::Mvn { theta } => {
            if !y.len().is_multiple_of(theta.dim()) {
                return Err(Error::DimensionMismatch { expected: theta.dim(), found: y.len() % theta.dim() });
            }
            mvn_logpdf(ystar, theta)
        }
        Model::Gp { design, params } => {
            let sub = design.with_first_observations(y.len())?;
            let (mean, cov) = crate::gppredict::gp_conditional_normal(&sub, &DVector::from_column_slice(y), params)?;
            mvn_logpdf(ystar, &MvnParams::from_covariance(mean, &cov)?)
        }
    }
}

/// Seed for the `index`-th independent run derived from `base` (SplitMix64).
pub fn derived_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One true parameter in a constancy experiment.
#[derive(Debug, Clone)]
pub struct ConstancyRun {
    pub model: Model,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstancyComparison {
    pub first: usize,
    pub second: usize,
    pub difference: f64,
    pub combined_std_err: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstancyReport {
    pub predictor: String,
    /// Index 0 is the base run, followed by the alternatives in order.
    pub estimates: Vec<RiskEstimate>,
    pub comparisons: Vec<ConstancyComparison>,
}

impl ConstancyReport {
    pub fn any_flagged(&self) -> bool {
        self.comparisons.iter().any(|c| c.flagged)
    }
}

/// Estimates the risk of one scorer at the base parameter and at each
/// alternative, flagging any pair whose means differ by more than three
/// combined standard errors.
pub fn risk_constancy_report_with(
    base: &SamplingPlan,
    scorer: &dyn RiskScorer,
    alternatives: &[ConstancyRun],
) -> Result<ConstancyReport> {
    let mut estimates = vec![estimate_risk_custom(base, &[scorer])?[0]];
    for alt in alternatives {
        let plan = SamplingPlan { model: alt.model.clone(), seed: alt.seed, ..base.clone() };
        estimates.push(estimate_risk_custom(&plan, &[scorer])?[0]);
    }
    Ok(compare(scorer.label(), estimates))
}

/// [`risk_constancy_report_with`] for a built-in predictor.
pub fn risk_constancy_report(
    base: &ExperimentSpec,
    alternatives: &[ConstancyRun],
) -> Result<ConstancyReport> {
    let mut estimates = vec![estimate_risk(base)?];
    for alt in alternatives {
        let plan = SamplingPlan { model: alt.model.clone(), seed: alt.seed, ..base.plan.clone() };
        estimates.push(estimate_risk(&ExperimentSpec { plan, predictor: base.predictor })?);
    }
    Ok(compare(base.predictor.label(), estimates))
}

/// Alternatives at independent seeds derived from the base seed.
pub fn independent_runs(base_seed: u64, models: impl IntoIterator<Item = Model>) -> Vec<ConstancyRun> {
    models
        .into_iter()
        .enumerate()
        .map(|(i, model)| ConstancyRun { model, seed: derived_seed(base_seed, i as u64) })
        .collect()
}

fn compare(predictor: String, estimates: Vec<RiskEstimate>) -> ConstancyReport {
    let mut comparisons = Vec::new();
    for i in 0..estimates.len() {
        for j in i + 1..estimates.len() {
            let difference = estimates[j].mean - estimates[i].mean;
            let combined_std_err = estimates[i].std_err.hypot(estimates[j].std_err);
            comparisons.push(ConstancyComparison {
                first: i,
                second: j,
                difference,
                combined_std_err,
                flagged: difference.abs() > 3.0 * combined_std_err,
            });
        }
    }
    ConstancyReport { predictor, estimates, comparisons }
}
