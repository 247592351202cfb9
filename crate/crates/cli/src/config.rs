//! Flat `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored. List-valued keys (`n`,
//! `predictor`) may repeat, one value per line, or hold several
//! whitespace-separated values. Every other key may appear once.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use predrisk::data::{DEMO_OBSERVATIONS, FROZEN_DESIGN};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    MvnRisk,
    GpRisk,
    GpImprovement,
    MvnGrid,
    CheckInvariance,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::MvnRisk => "mvn-risk",
            Command::GpRisk => "gp-risk",
            Command::GpImprovement => "gp-improvement",
            Command::MvnGrid => "mvn-grid",
            Command::CheckInvariance => "check-invariance",
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: `{key}` was already set on line {first}")]
    Duplicate { line: usize, key: String, first: usize },
    #[error("line {line}: invalid value for `{key}`: {message}")]
    InvalidValue { line: usize, key: String, message: String },
    #[error("config says command `{found}` but `{expected}` was requested")]
    CommandMismatch { expected: String, found: String },
    #[error("{0}")]
    Invalid(String),
}

impl ConfigError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ConfigError::Syntax { line }
            | ConfigError::UnknownKey { line, .. }
            | ConfigError::Duplicate { line, .. }
            | ConfigError::InvalidValue { line, .. } => Some(*line),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GridCenter {
    /// Sample mean of the observations.
    Mean,
    Point(f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub center: GridCenter,
    /// Half-width of the box in sample standard deviations per axis.
    pub half_width: f64,
    /// Points per axis.
    pub resolution: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { center: GridCenter::Mean, half_width: 5.0, resolution: 201 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub n_samples: u64,
    pub shards: u32,
    pub n_range: Vec<usize>,
    pub predictors: Vec<String>,
    pub dimension: usize,
    pub design_file: Option<PathBuf>,
    pub data_file: Option<PathBuf>,
    pub lengthscale: f64,
    pub grid: GridSpec,
    pub out: PathBuf,
}

pub const DEFAULT_SEED: u64 = 20240917;
pub const DEFAULT_SAMPLES: u64 = 1 << 22;

const KEYS: &[&str] = &[
    "command",
    "seed",
    "samples",
    "shards",
    "n",
    "predictor",
    "dimension",
    "design",
    "data",
    "lengthscale",
    "grid_center",
    "grid_halfwidth",
    "grid_resolution",
    "out",
];
const LIST_KEYS: &[&str] = &["n", "predictor"];

/// One `key = value` line.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Splits the text into entries, rejecting malformed lines, unknown keys and
/// repeated scalar keys.
pub fn parse_entries(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut entries: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or(ConfigError::Syntax { line })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Syntax { line });
        }
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey { line, key: key.into() });
        }
        if !LIST_KEYS.contains(&key) {
            if let Some(first) = entries.iter().find(|e| e.key == key) {
                return Err(ConfigError::Duplicate { line, key: key.into(), first: first.line });
            }
        }
        entries.push(Entry { line, key: key.into(), value: value.into() });
    }
    Ok(entries)
}

fn parse_value<T: std::str::FromStr>(entry: &Entry, text: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    text.parse::<T>().map_err(|e| ConfigError::InvalidValue {
        line: entry.line,
        key: entry.key.clone(),
        message: format!("`{text}`: {e}"),
    })
}

fn invalid(entry: &Entry, message: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue { line: entry.line, key: entry.key.clone(), message: message.into() }
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        let n_range = match command {
            Command::MvnRisk => (3..=10).collect(),
            Command::GpRisk => (4..=10).collect(),
            _ => Vec::new(),
        };
        Self {
            command,
            seed: DEFAULT_SEED,
            n_samples: DEFAULT_SAMPLES,
            shards: 1,
            n_range,
            predictors: Vec::new(),
            dimension: 2,
            design_file: None,
            data_file: None,
            lengthscale: 1.0,
            grid: GridSpec::default(),
            out: PathBuf::from("results"),
        }
    }

    /// Reads a config for `command`. Relative file paths in the config are
    /// resolved against `base_dir`.
    pub fn parse(command: Command, text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut cfg = Self::defaults(command);
        let mut n_range = Vec::new();
        let mut predictors = Vec::new();
        for entry in parse_entries(text)? {
            let value = entry.value.as_str();
            match entry.key.as_str() {
                "command" => {
                    if value != command.name() {
                        return Err(ConfigError::CommandMismatch { expected: command.name().into(), found: value.into() });
                    }
                }
                "seed" => cfg.seed = parse_value(&entry, value)?,
                "samples" => cfg.n_samples = parse_value(&entry, value)?,
                "shards" => cfg.shards = parse_value(&entry, value)?,
                "n" => {
                    for part in value.split_whitespace() {
                        n_range.push(parse_value(&entry, part)?);
                    }
                }
                "predictor" => predictors.extend(value.split_whitespace().map(str::to_string)),
                "dimension" => cfg.dimension = parse_value(&entry, value)?,
                "design" => cfg.design_file = Some(base_dir.join(value)),
                "data" => cfg.data_file = Some(base_dir.join(value)),
                "lengthscale" => cfg.lengthscale = parse_value(&entry, value)?,
                "grid_center" => {
                    cfg.grid.center = if value == "mean" {
                        GridCenter::Mean
                    } else {
                        let parts: Vec<&str> = value.split_whitespace().collect();
                        if parts.len() != 2 {
                            return Err(invalid(&entry, "expected `mean` or two coordinates"));
                        }
                        GridCenter::Point(parse_value(&entry, parts[0])?, parse_value(&entry, parts[1])?)
                    }
                }
                "grid_halfwidth" => cfg.grid.half_width = parse_value(&entry, value)?,
                "grid_resolution" => cfg.grid.resolution = parse_value(&entry, value)?,
                "out" => cfg.out = base_dir.join(value),
                _ => unreachable!("keys are checked by parse_entries"),
            }
            match entry.key.as_str() {
                "samples" if cfg.n_samples < 2 => return Err(invalid(&entry, "need at least 2 samples")),
                "shards" if cfg.shards == 0 => return Err(invalid(&entry, "need at least 1 shard")),
                "dimension" if cfg.dimension == 0 => return Err(invalid(&entry, "dimension must be positive")),
                "lengthscale" if !(cfg.lengthscale > 0.0 && cfg.lengthscale.is_finite()) => {
                    return Err(invalid(&entry, "lengthscale must be positive"))
                }
                "grid_halfwidth" if !(cfg.grid.half_width > 0.0 && cfg.grid.half_width.is_finite()) => {
                    return Err(invalid(&entry, "half-width must be positive"))
                }
                "grid_resolution" if cfg.grid.resolution < 2 => return Err(invalid(&entry, "need at least 2 points per axis")),
                _ => {}
            }
        }
        if !n_range.is_empty() {
            cfg.n_range = n_range;
        }
        cfg.predictors = predictors;
        Ok(cfg)
    }

    /// Applies command-line flags, which take precedence over config keys.
    pub fn apply_overrides(
        &mut self,
        seed: Option<u64>,
        samples: Option<u64>,
        shards: Option<u32>,
        out: Option<PathBuf>,
    ) -> Result<(), ConfigError> {
        if let Some(seed) = seed {
            self.seed = seed;
        }
        if let Some(samples) = samples {
            if samples < 2 {
                return Err(ConfigError::Invalid("--samples must be at least 2".into()));
            }
            self.n_samples = samples;
        }
        if let Some(shards) = shards {
            if shards == 0 {
                return Err(ConfigError::Invalid("--shards must be at least 1".into()));
            }
            self.shards = shards;
        }
        if let Some(out) = out {
            self.out = out;
        }
        Ok(())
    }

    /// SHA-256 over the fields that affect results. The shard count and the
    /// output location are excluded; referenced files enter by content.
    pub fn config_hash(&self, design_text: Option<&str>, data_text: Option<&str>) -> String {
        let mut canon = format!("command={}\n", self.command.name());
        let file_digest = |text: Option<&str>, builtin: &str| hex(&Sha256::digest(text.unwrap_or(builtin).as_bytes()));
        match self.command {
            Command::MvnRisk | Command::GpRisk => {
                let _ = writeln!(canon, "seed={}\nsamples={}", self.seed, self.n_samples);
                let _ = writeln!(canon, "n={:?}\npredictors={:?}", self.n_range, self.predictors);
                if self.command == Command::MvnRisk {
                    let _ = writeln!(canon, "dimension={}", self.dimension);
                } else {
                    let _ = writeln!(canon, "lengthscale={:?}\ndesign={}", self.lengthscale, file_digest(design_text, FROZEN_DESIGN));
                }
            }
            Command::GpImprovement => {
                let _ = writeln!(canon, "lengthscale={:?}\ndesign={}", self.lengthscale, file_digest(design_text, FROZEN_DESIGN));
            }
            Command::MvnGrid => {
                let _ = writeln!(canon, "grid={:?}\ndata={}", self.grid, file_digest(data_text, DEMO_OBSERVATIONS));
            }
            Command::CheckInvariance => {
                let _ = writeln!(canon, "seed={}", self.seed);
            }
        }
        hex(&Sha256::digest(canon.as_bytes()))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
