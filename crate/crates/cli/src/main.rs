use std::path::PathBuf;
use std::process::ExitCode;

use ballmax_cli::{run, ExperimentConfig, RunError, RunOptions, Status};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ballmax", version, about = "Ball-maximizer verification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory; overrides the config's `output`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for competitor runs.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Multiplies every numerical tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    tol_scale: f64,

    /// Fallback output directory.
    #[arg(long, env = "BALLMAX_OUT", hide = true, default_value = "ballmax-out")]
    default_out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its CSV tables and summary.
    Run { config: PathBuf },
    /// Report every problem in a config without running it.
    Validate { config: PathBuf },
}

fn fail(e: RunError) -> ExitCode {
    eprintln!("ballmax: {e}");
    ExitCode::from(e.status().code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Validate { config } => {
            let cfg = match ExperimentConfig::load(config) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            let issues = cfg.validate();
            for issue in &issues {
                println!("{issue}");
            }
            if issues.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(Status::BadConfig.code())
            }
        }
        Command::Run { config } => {
            let cfg = match ExperimentConfig::load(config) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            let out_dir = cli
                .out
                .clone()
                .or_else(|| cfg.output.clone())
                .unwrap_or_else(|| cli.default_out.clone());
            let opts = RunOptions {
                out_dir,
                workers: cli.workers,
                tol_scale: cli.tol_scale,
            };
            match run(&cfg, &opts) {
                Ok(outcome) => {
                    print!("{}", outcome.summary);
                    if !outcome.failures.is_empty() {
                        eprintln!("ballmax: failed checks: {}", outcome.failures.join(", "));
                    }
                    ExitCode::from(outcome.status.code())
                }
                Err(e) => fail(e),
            }
        }
    }
}
