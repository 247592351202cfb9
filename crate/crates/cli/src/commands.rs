use std::fs;
use std::path::{Path, PathBuf};

use predrisk::checks::{run_invariance_checks, CheckResult};
use predrisk::data::{demo_observations, frozen_design, parse_design, parse_observations, reference_gp_params};
use predrisk::gppredict::{gp_entropy_improvement, GpPredictorKind};
use predrisk::mvnpredict::MvnPredictorKind;
use predrisk::numcore::{sample_stats, MvnParams};
use predrisk::riskmc::{estimate_risk_table, Model, PredictorTag, SamplingPlan};
use serde::{Deserialize, Serialize};

use crate::config::{Command, ConfigError, GridSpec, RunConfig};
use crate::error::CliError;
use crate::grid::{evaluate_grid, grid_axes, level_set_shape, LevelSetShape};
use crate::table::{write_csv, write_json, CellStatus, ResultRow, ResultTable, TableMetadata};

pub const LIBRARY_VERSION: &str = env!("CARGO_PKG_VERSION");
const CRN_POLICY: &str = "common random numbers across predictors within each n; per-sample substreams keyed by sample index";

/// Files written by a successful run.
#[derive(Debug, Default)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::File { path: path.display().to_string(), source })
}

fn optional_text(path: &Option<PathBuf>) -> Result<Option<String>, CliError> {
    path.as_deref().map(read_file).transpose()
}

fn unknown_predictor(tag: &str, model: &str) -> CliError {
    ConfigError::Invalid(format!("unknown {model} predictor `{tag}`")).into()
}

fn mvn_tags(cfg: &RunConfig) -> Result<Vec<(String, PredictorTag)>, CliError> {
    if cfg.predictors.is_empty() {
        return Ok(MvnPredictorKind::ALL
            .into_iter()
            .filter(|k| cfg.dimension == 2 || !matches!(k, MvnPredictorKind::RightInvariant | MvnPredictorKind::RightInvariantSwapped))
            .map(|k| (k.tag().to_string(), PredictorTag::Mvn(k)))
            .collect());
    }
    cfg.predictors
        .iter()
        .map(|t| {
            if t.eq_ignore_ascii_case("oracle") {
                return Ok(("oracle".to_string(), PredictorTag::Oracle));
            }
            let kind = MvnPredictorKind::from_tag(t).ok_or_else(|| unknown_predictor(t, "MVN"))?;
            if cfg.dimension != 2 && matches!(kind, MvnPredictorKind::RightInvariant | MvnPredictorKind::RightInvariantSwapped) {
                return Err(ConfigError::Invalid(format!("{kind} is only available for dimension 2")).into());
            }
            Ok((kind.tag().to_string(), PredictorTag::Mvn(kind)))
        })
        .collect()
}

fn gp_tags(cfg: &RunConfig) -> Result<Vec<(String, PredictorTag)>, CliError> {
    if cfg.predictors.is_empty() {
        return Ok(GpPredictorKind::ALL.into_iter().map(|k| (k.tag().to_string(), PredictorTag::Gp(k))).collect());
    }
    cfg.predictors
        .iter()
        .map(|t| {
            if t.eq_ignore_ascii_case("oracle") {
                return Ok(("oracle".to_string(), PredictorTag::Oracle));
            }
            let kind = GpPredictorKind::from_tag(t).ok_or_else(|| unknown_predictor(t, "GP"))?;
            Ok((kind.tag().to_string(), PredictorTag::Gp(kind)))
        })
        .collect()
}

fn is_defined(tag: PredictorTag, n: usize, model: &Model) -> bool {
    match (tag, model) {
        (PredictorTag::Oracle, _) => n >= 1,
        (PredictorTag::Mvn(kind), Model::Mvn { theta }) => kind.is_defined(n, theta.dim()),
        (PredictorTag::Gp(_), Model::Gp { design, .. }) => n > design.p() && n <= design.n(),
        _ => false,
    }
}

fn risk_table(cfg: &RunConfig, model: Model, tags: &[(String, PredictorTag)], model_label: String, hash: String) -> Result<ResultTable, CliError> {
    if !cfg.n_samples.is_multiple_of(cfg.shards as u64) {
        return Err(ConfigError::Invalid(format!("samples ({}) must be divisible by shards ({})", cfg.n_samples, cfg.shards)).into());
    }
    if let Model::Gp { design, .. } = &model {
        if let Some(&n) = cfg.n_range.iter().find(|&&n| n > design.n()) {
            return Err(ConfigError::Invalid(format!("n = {n} exceeds the {} training points of the design", design.n())).into());
        }
    }
    let mut rows = Vec::new();
    for &n in &cfg.n_range {
        let defined: Vec<PredictorTag> = tags.iter().map(|t| t.1).filter(|t| is_defined(*t, n, &model)).collect();
        let plan = SamplingPlan { model: model.clone(), n, n_samples: cfg.n_samples, seed: cfg.seed, shards: cfg.shards };
        let estimates = if defined.is_empty() { Vec::new() } else { estimate_risk_table(&plan, &defined)? };
        let mut next = estimates.into_iter();
        for (label, tag) in tags {
            let row = if is_defined(*tag, n, &model) {
                let e = next.next().expect("one estimate per defined predictor");
                ResultRow {
                    predictor: label.clone(),
                    n,
                    status: CellStatus::Ok,
                    mean: Some(e.mean),
                    std_err: Some(e.std_err),
                    n_samples: e.n_samples,
                    n_undefined: e.n_undefined,
                }
            } else {
                ResultRow {
                    predictor: label.clone(),
                    n,
                    status: CellStatus::Undefined,
                    mean: None,
                    std_err: None,
                    n_samples: cfg.n_samples,
                    n_undefined: 0,
                }
            };
            rows.push(row);
        }
    }
    Ok(ResultTable {
        metadata: TableMetadata {
            command: cfg.command.name().into(),
            seed: cfg.seed,
            config_hash: hash,
            library_version: LIBRARY_VERSION.into(),
            n_samples: cfg.n_samples,
            shards: cfg.shards,
            model: model_label,
            random_numbers: CRN_POLICY.into(),
        },
        rows,
    })
}

fn load_design(cfg: &RunConfig, text: &Option<String>) -> Result<predrisk::gppredict::GpDesign, CliError> {
    Ok(match text {
        Some(t) => parse_design(t, cfg.lengthscale)?,
        None if cfg.lengthscale == predrisk::data::FROZEN_LENGTHSCALE => frozen_design(),
        None => parse_design(predrisk::data::FROZEN_DESIGN, cfg.lengthscale)?,
    })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ImprovementRow {
    pub n_obs: usize,
    pub improvement: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ImprovementReport {
    pub command: String,
    pub config_hash: String,
    pub library_version: String,
    pub design: String,
    pub lengthscale: f64,
    pub nondecreasing: bool,
    pub rows: Vec<ImprovementRow>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GridSummary {
    pub command: String,
    pub config_hash: String,
    pub library_version: String,
    pub grid: GridSpec,
    pub observations: Vec<Vec<f64>>,
    pub files: Vec<String>,
    /// Shape of the superlevel set two nats below each grid's maximum.
    pub level_sets: Vec<(String, Option<LevelSetShape>)>,
    pub r_vs_rswapped_max_abs_diff: f64,
    pub r_rswapped_differ: bool,
    pub ij_j_eccentricity_diff: f64,
    pub ij_j_orientation_diff_deg: f64,
    pub ij_j_same_shape: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    pub library_version: String,
    pub all_passed: bool,
    pub results: Vec<CheckResult>,
}

const LEVEL_DROP: f64 = 2.0;

/// Runs the configured command and writes its outputs under `cfg.out`.
pub fn run(cfg: &RunConfig) -> Result<RunReport, CliError> {
    fs::create_dir_all(&cfg.out)?;
    let design_text = optional_text(&cfg.design_file)?;
    let data_text = optional_text(&cfg.data_file)?;
    let hash = cfg.config_hash(design_text.as_deref(), data_text.as_deref());
    let stem = cfg.command.name();
    let mut report = RunReport::default();
    match cfg.command {
        Command::MvnRisk => {
            let tags = mvn_tags(cfg)?;
            let model = Model::Mvn { theta: MvnParams::standard(cfg.dimension) };
            let label = format!("normal d={} at theta*=(I, 0)", cfg.dimension);
            risk_table(cfg, model, &tags, label, hash)?.write(&cfg.out, stem)?;
            report.files.extend([cfg.out.join(format!("{stem}.csv")), cfg.out.join(format!("{stem}.json"))]);
        }
        Command::GpRisk => {
            let tags = gp_tags(cfg)?;
            let design = load_design(cfg, &design_text)?;
            let params = reference_gp_params(design.p());
            let label = format!(
                "GP, {} design, lengthscale {}, beta*=0, sigma_y*=1",
                if design_text.is_some() { "custom" } else { "frozen" },
                cfg.lengthscale
            );
            risk_table(cfg, Model::Gp { design, params }, &tags, label, hash)?.write(&cfg.out, stem)?;
            report.files.extend([cfg.out.join(format!("{stem}.csv")), cfg.out.join(format!("{stem}.json"))]);
        }
        Command::GpImprovement => {
            let design = load_design(cfg, &design_text)?;
            let rows = (0..=design.n())
                .map(|n_obs| Ok(ImprovementRow { n_obs, improvement: gp_entropy_improvement(&design, n_obs)? }))
                .collect::<Result<Vec<_>, CliError>>()?;
            let nondecreasing = rows.windows(2).all(|w| w[1].improvement >= w[0].improvement - 1e-9);
            write_csv(&cfg.out.join(format!("{stem}.csv")), &rows)?;
            let out = ImprovementReport {
                command: stem.into(),
                config_hash: hash,
                library_version: LIBRARY_VERSION.into(),
                design: if design_text.is_some() { "custom".into() } else { "frozen".into() },
                lengthscale: cfg.lengthscale,
                nondecreasing,
                rows,
            };
            write_json(&cfg.out.join(format!("{stem}.json")), &out)?;
            report.files.extend([cfg.out.join(format!("{stem}.csv")), cfg.out.join(format!("{stem}.json"))]);
            if !nondecreasing {
                return Err(CliError::PropertyFailed("entropy improvement decreased with more observations".into()));
            }
        }
        Command::MvnGrid => {
            let obs = match &data_text {
                Some(t) => parse_observations(t)?,
                None => demo_observations(),
            };
            if obs.d() != 2 {
                return Err(ConfigError::Invalid(format!("grid data must be bivariate, got dimension {}", obs.d())).into());
            }
            let stats = sample_stats(&obs)?;
            let axes = grid_axes(&stats, obs.n(), &cfg.grid);
            let mut grids = Vec::new();
            let mut files = Vec::new();
            for kind in MvnPredictorKind::ALL {
                let grid = evaluate_grid(kind, &obs, &axes);
                let name = format!("{stem}_{}.csv", kind.tag());
                write_csv(&cfg.out.join(&name), &grid)?;
                report.files.push(cfg.out.join(&name));
                files.push(name);
                grids.push((kind, grid));
            }
            let get = |k: MvnPredictorKind| &grids.iter().find(|g| g.0 == k).expect("all kinds evaluated").1;
            let r_diff = get(MvnPredictorKind::RightInvariant)
                .iter()
                .zip(get(MvnPredictorKind::RightInvariantSwapped))
                .filter_map(|(a, b)| Some((a.log_density? - b.log_density?).abs()))
                .fold(0.0, f64::max);
            let level_sets: Vec<(String, Option<LevelSetShape>)> =
                grids.iter().map(|(k, g)| (k.tag().to_string(), level_set_shape(g, &axes, LEVEL_DROP))).collect();
            let shape = |k: MvnPredictorKind| level_sets.iter().find(|s| s.0 == k.tag()).and_then(|s| s.1);
            let (ij, j) = (shape(MvnPredictorKind::IndependenceJeffreys), shape(MvnPredictorKind::Jeffreys));
            let (ecc_diff, angle_diff) = match (ij, j) {
                (Some(a), Some(b)) => {
                    let d = (a.orientation_deg - b.orientation_deg).rem_euclid(180.0);
                    ((a.eccentricity - b.eccentricity).abs(), d.min(180.0 - d))
                }
                _ => (f64::INFINITY, f64::INFINITY),
            };
            let same_shape = ecc_diff < 0.02
                && angle_diff < 2.0
                && ij.is_some_and(|s| !s.touches_boundary)
                && j.is_some_and(|s| !s.touches_boundary);
            let summary = GridSummary {
                command: stem.into(),
                config_hash: hash,
                library_version: LIBRARY_VERSION.into(),
                grid: cfg.grid.clone(),
                observations: (0..obs.n()).map(|i| obs.row(i)).collect(),
                files,
                level_sets,
                r_vs_rswapped_max_abs_diff: r_diff,
                r_rswapped_differ: r_diff > 1e-3,
                ij_j_eccentricity_diff: ecc_diff,
                ij_j_orientation_diff_deg: angle_diff,
                ij_j_same_shape: same_shape,
            };
            write_json(&cfg.out.join(format!("{stem}.json")), &summary)?;
            report.files.push(cfg.out.join(format!("{stem}.json")));
            if !(summary.r_rswapped_differ && summary.ij_j_same_shape) {
                return Err(CliError::PropertyFailed("grid structure checks failed; see the summary JSON".into()));
            }
        }
        Command::CheckInvariance => {
            let results = run_invariance_checks(cfg.seed)?;
            let all_passed = results.iter().all(|r| r.passed);
            write_csv(&cfg.out.join(format!("{stem}.csv")), &results)?;
            let out = CheckReport {
                command: stem.into(),
                seed: cfg.seed,
                config_hash: hash,
                library_version: LIBRARY_VERSION.into(),
                all_passed,
                results,
            };
            write_json(&cfg.out.join(format!("{stem}.json")), &out)?;
            report.files.extend([cfg.out.join(format!("{stem}.csv")), cfg.out.join(format!("{stem}.json"))]);
            if !all_passed {
                let failed: Vec<&str> = out.results.iter().filter(|r| !r.passed).map(|r| r.property.as_str()).collect();
                return Err(CliError::PropertyFailed(format!("failed properties: {}", failed.join("; "))));
            }
        }
    }
    Ok(report)
}
