//! Command-line interface.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{load_config, BoundSuiteConfig, EnvDumpConfig, SweepConfig, SweepKind, TrainConfig};
use crate::emit::{emit_results, emit_suite, to_json, write_file};
use crate::error::{HarnessError, Result};
use crate::suite::run_bound_suite;
use crate::sweep::run_sweep;
use crate::train::{dump_environment, run_train};

/// Output directory used when neither `--out` nor the config's `output_path` is set.
pub const DEFAULT_OUT_DIR: &str = "ilgap-out";

#[derive(Debug, Parser)]
#[command(name = "ilgap", version, about = "Exact tabular imitation learning: sweeps, training and bound certification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// JSON config document; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the config's root seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the bound suite; exits 3 if a deterministic bound fails.
    CheckBounds(CommonArgs),
    /// Value gap against the discount factor at fixed m.
    SweepHorizon(CommonArgs),
    /// Value gap against the number of demonstrations at fixed discount.
    SweepSamples(CommonArgs),
    /// Train one learner and check the deterministic bounds on it.
    Train(CommonArgs),
    /// Environment utilities.
    Env {
        #[command(subcommand)]
        action: EnvCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum EnvCommand {
    /// Write the environment in the flat tensor format (stdout without --out).
    Dump(CommonArgs),
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn out_dir(args: &CommonArgs, configured: &Option<String>) -> PathBuf {
    args.out.clone().or_else(|| configured.as_ref().map(PathBuf::from)).unwrap_or_else(|| DEFAULT_OUT_DIR.into())
}

pub fn run(command: &Command) -> Result<()> {
    match command {
        Command::CheckBounds(args) => check_bounds(args),
        Command::SweepHorizon(args) => sweep(args, SweepKind::Horizon),
        Command::SweepSamples(args) => sweep(args, SweepKind::Samples),
        Command::Train(args) => train(args),
        Command::Env { action: EnvCommand::Dump(args) } => env_dump(args),
    }
}

fn check_bounds(args: &CommonArgs) -> Result<()> {
    let mut config: BoundSuiteConfig = load_config(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let result = run_bound_suite(&config)?;
    let (summary, _) = emit_suite(&result, &out_dir(args, &config.output_path))?;
    for row in &result.summary {
        println!(
            "{:<22} instances {:>5}  min_slack {:>12.4e}  violation_rate {:.4}",
            row.bound_id.as_str(),
            row.instances,
            row.min_slack,
            row.violation_rate
        );
    }
    println!("{} instances, {} deterministic violations; summary at {}", result.instances, result.deterministic_violations, summary.display());
    result.check()
}

fn sweep(args: &CommonArgs, kind: SweepKind) -> Result<()> {
    let mut config: SweepConfig = load_config(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        config.base_seed = seed;
    }
    let dir = out_dir(args, &config.output_path);
    let result = run_sweep(&config, kind)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    for r in result.failed_rows() {
        eprintln!("warning: cell {} gamma {} m {} seed {} failed: {}", r.algorithm, r.gamma, r.m, r.seed, r.error.as_deref().unwrap_or(""));
    }
    let stem = match kind {
        SweepKind::Horizon => "sweep_horizon",
        SweepKind::Samples => "sweep_samples",
    };
    let (csv, json) = emit_results(&result, &dir.join(stem))?;
    for s in &result.slopes {
        match (s.slope, s.ci_low, s.ci_high) {
            (Some(b), Some(lo), Some(hi)) => println!("slope {:<6} m={:<4} {b:.3} (90% CI {lo:.3} to {hi:.3})", s.algorithm.as_str(), s.m),
            _ => println!("slope {:<6} m={:<4} absent", s.algorithm.as_str(), s.m),
        }
    }
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(())
}

fn train(args: &CommonArgs) -> Result<()> {
    let mut config: TrainConfig = load_config(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let outcome = run_train(&config)?;
    let path = out_dir(args, &config.output_path).join("train.json");
    write_file(&path, &to_json(&outcome)?)?;
    println!("{} value gap {:.6e}; wrote {}", outcome.algorithm, outcome.value_gap, path.display());
    outcome.check()
}

fn env_dump(args: &CommonArgs) -> Result<()> {
    let mut config: EnvDumpConfig = load_config(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        config.environment.seed = seed;
    }
    let bytes = to_json(&dump_environment(&config)?)?;
    match args.out.clone().or_else(|| config.output_path.as_ref().map(PathBuf::from)) {
        Some(dir) => {
            let path = dir.join("mdp.json");
            write_file(&path, &bytes)?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes).map_err(|e| HarnessError::io(Path::new("<stdout>"), e))?;
        }
    }
    Ok(())
}
