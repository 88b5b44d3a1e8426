//! `ergolab`: runs one experiment per invocation from a JSON config and
//! writes JSON/CSV artifacts.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Overrides;
use crate::error::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "ergolab",
    version,
    about = "Experiments with expanding circle maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Orbit histogram and Lyapunov exponent.
    Simulate(Args),
    /// Partition entropy, Lyapunov exponent and Pesin residual of a measure.
    Entropy(Args),
    /// Ulam matrix, stationary density and pressure.
    Ulam(Args),
    /// Clusters terminal empirical measures of a Lebesgue sample.
    SrbScan(Args),
    /// Deviation fractions of empirical measures from a reference measure.
    Decay(Args),
    /// Merges JSON outputs of earlier runs into one summary.
    Report(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    threads: Option<usize>,
}

type Runner = fn(&std::path::Path, &Overrides) -> CliResult<Vec<PathBuf>>;

fn run(cli: Cli) -> CliResult<Vec<PathBuf>> {
    let (args, run): (&Args, Runner) = match &cli.command {
        Command::Simulate(a) => (a, commands::simulate),
        Command::Entropy(a) => (a, commands::entropy),
        Command::Ulam(a) => (a, commands::ulam),
        Command::SrbScan(a) => (a, commands::srb_scan),
        Command::Decay(a) => (a, commands::decay),
        Command::Report(a) => (a, commands::report),
    };
    if let Some(t) = args.threads {
        if t == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let overrides = Overrides {
        seed: args.seed,
        out: args.out.clone(),
    };
    run(&args.config, &overrides)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
