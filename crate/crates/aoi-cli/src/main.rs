//! Command-line experiment runner.
//!
//! One flat command: a single experiment by default, a sweep when
//! `--axis`/`--values` are given, or a bundled preset via `--preset`.
//! Configuration comes from flags and/or a JSON file (`--config`); flags
//! override the file. Errors go to stderr as one JSON object and a
//! nonzero exit code.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use aoi_core::harness::{
    records_to_csv, run_experiment, run_sweep, write_csv, write_summary_json, ExperimentConfig,
    HarnessError, LoadMode, SweepAxis,
};
use aoi_core::policy::PolicyKind;
use aoi_core::presets::{run_preset, PresetName, PresetScale};

/// Discrete-time age-of-information experiments over a slotted
/// random-access collision channel.
#[derive(Debug, Parser)]
#[command(name = "aoi-cli", version, about)]
struct Cli {
    /// Transmission policy: maxweight|aloha|aat|sat|gsat|randomized.
    #[arg(long)]
    policy: Option<PolicyKind>,

    /// Number of sources M.
    #[arg(long)]
    sources: Option<usize>,

    /// Per-source, per-slot arrival probability, in (0, 1].
    #[arg(long)]
    theta: Option<f64>,

    /// Number of slots K per replication.
    #[arg(long)]
    horizon: Option<u64>,

    /// Master seed; replication r draws from an independent substream.
    #[arg(long)]
    seed: Option<u64>,

    /// Number of replications.
    #[arg(long)]
    replications: Option<u32>,

    /// Age-gain distribution truncation (default 4*ceil(e*M)).
    #[arg(long)]
    truncation: Option<usize>,

    /// Technology sum throughput, required for --policy gsat.
    #[arg(long)]
    capacity: Option<f64>,

    /// Backlog-estimate load for plain ALOHA: raw|clamped.
    #[arg(long, value_name = "MODE")]
    load_mode: Option<LoadMode>,

    /// Initial slots excluded from the statistics.
    #[arg(long)]
    burn_in: Option<u64>,

    /// Output CSV path (single run / sweep) or directory (preset).
    /// Without it, run and sweep CSV goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Run a bundled sweep: fig1a|fig1b|fig2a|fig2b.
    #[arg(long)]
    preset: Option<PresetName>,

    /// Base config as a JSON file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Sweep axis: theta|sources|policy|capacity.
    #[arg(long)]
    axis: Option<String>,

    /// Comma-separated sweep values for --axis.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<String>>,

    /// Worker threads for replications (default: hardware parallelism).
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let payload = serde_json::json!({ "error": err.to_string() });
            eprintln!("{payload}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }

    if let Some(preset) = cli.preset {
        let defaults = PresetScale::default();
        let scale = PresetScale {
            horizon: cli.horizon.unwrap_or(defaults.horizon),
            replications: cli.replications.unwrap_or(defaults.replications),
            seed: cli.seed.unwrap_or(defaults.seed),
            burn_in: cli.burn_in.unwrap_or(defaults.burn_in),
        };
        let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
        let output = run_preset(preset, &scale, &out_dir)?;
        for f in &output.files {
            println!("{}", f.display());
        }
        return Ok(());
    }

    let config = merge_config(&cli)?;
    config.validate()?;

    let records = match (&cli.axis, &cli.values) {
        (Some(axis), Some(values)) => {
            let axis = SweepAxis::parse(axis, values)?;
            run_sweep(&config, &axis)?
        }
        (Some(_), None) | (None, Some(_)) => {
            return Err(HarnessError::Config {
                field: "axis".into(),
                message: "--axis and --values must be given together".into(),
            }
            .into());
        }
        (None, None) => run_experiment(&config)?,
    };

    match &config.out {
        Some(path) => {
            write_csv(path, &records)?;
            let summary_path = path.with_extension("summary.json");
            write_summary_json(&summary_path, &config, &records)?;
            println!("{}", path.display());
            println!("{}", summary_path.display());
        }
        None => print!("{}", records_to_csv(&records)),
    }
    Ok(())
}

/// JSON config file as the base, flags on top.
fn merge_config(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => {
            let body = std::fs::read_to_string(path)
                .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
            serde_json::from_str::<ExperimentConfig>(&body)
                .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?
        }
        None => {
            let policy = cli.policy.ok_or_else(|| {
                anyhow::anyhow!("invalid config: field 'policy': required (flag or --config file)")
            })?;
            let sources = cli.sources.ok_or_else(|| {
                anyhow::anyhow!("invalid config: field 'sources': required (flag or --config file)")
            })?;
            let theta = cli.theta.ok_or_else(|| {
                anyhow::anyhow!("invalid config: field 'theta': required (flag or --config file)")
            })?;
            let horizon = cli.horizon.ok_or_else(|| {
                anyhow::anyhow!("invalid config: field 'horizon': required (flag or --config file)")
            })?;
            ExperimentConfig::new(policy, sources, theta, horizon)
        }
    };
    if let Some(v) = cli.policy {
        config.policy = v;
    }
    if let Some(v) = cli.sources {
        config.sources = v;
    }
    if let Some(v) = cli.theta {
        config.theta = v;
    }
    if let Some(v) = cli.horizon {
        config.horizon = v;
    }
    if let Some(v) = cli.seed {
        config.seed = v;
    }
    if let Some(v) = cli.replications {
        config.replications = v;
    }
    if let Some(v) = cli.truncation {
        config.truncation = Some(v);
    }
    if let Some(v) = cli.capacity {
        config.capacity = Some(v);
    }
    if let Some(v) = cli.load_mode {
        config.load_mode = v;
    }
    if let Some(v) = cli.burn_in {
        config.burn_in = v;
    }
    if let Some(v) = &cli.out {
        config.out = Some(v.clone());
    }
    Ok(config)
}
