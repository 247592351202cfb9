use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use predrisk_cli::{run, CliError, Command, RunConfig};

/// Predictive-risk tables, log-density grids and invariance checks.
#[derive(Parser, Debug)]
#[command(name = "predict", version)]
struct Args {
    command: Command,
    /// Flat `key = value` config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    shards: Option<u32>,
}

fn load(args: &Args) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|source| CliError::File { path: args.config.display().to_string(), source })?;
    let base = args.config.parent().map(PathBuf::from).unwrap_or_default();
    let mut cfg = RunConfig::parse(args.command, &text, &base)?;
    cfg.apply_overrides(args.seed, args.samples, args.shards, args.out.clone())?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let command = args.command.name();
    let mut out_dir = args.out.clone();
    let result = load(&args).and_then(|cfg| {
        out_dir = Some(cfg.out.clone());
        run(&cfg)
    });
    match result {
        Ok(report) => {
            for file in report.files {
                println!("{}", file.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            let record = serde_json::to_string(&err.record(command)).unwrap_or_else(|_| err.to_string());
            eprintln!("{record}");
            if let Some(dir) = out_dir.filter(|d| d.is_dir()) {
                let _ = std::fs::write(dir.join(format!("{command}.error.json")), format!("{record}\n"));
            }
            ExitCode::from(err.exit_code())
        }
    }
}
