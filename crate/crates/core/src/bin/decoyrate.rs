use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use decoyrate::harness::simulate::write_simulation;
use decoyrate::harness::{
    builtin_names, load_scenario, run_scenario, simulate_scenario, write_report, HarnessError,
};

/// Finite-key decoy-state QKD key-rate calculator.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize every cell of a scenario and write CSV tables plus a manifest.
    Run {
        /// Builtin scenario name or path to a scenario file.
        scenario: String,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Recorded in the manifest; the sweep itself is deterministic.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Monte Carlo counts for the protocol templates of a scenario, as CSV on stdout.
    Simulate {
        /// Builtin scenario name or path to a scenario file.
        config: String,
        #[arg(long)]
        pulses: u64,
        #[arg(long)]
        seed: u64,
    },
    /// List the builtin scenarios.
    ListScenarios,
}

enum Failure {
    Validation(anyhow::Error),
    Io(anyhow::Error),
}

fn classify(e: HarnessError) -> Failure {
    if e.is_io() {
        Failure::Io(e.into())
    } else {
        Failure::Validation(e.into())
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run {
            scenario,
            out,
            jobs,
            seed,
        } => {
            if let Some(jobs) = jobs {
                if jobs == 0 {
                    return Err(Failure::Validation(anyhow::anyhow!(
                        "--jobs must be at least 1"
                    )));
                }
                rayon::ThreadPoolBuilder::new()
                    .num_threads(jobs)
                    .build_global()
                    .context("configuring the worker pool")
                    .map_err(Failure::Io)?;
            }
            let s = load_scenario(&scenario).map_err(classify)?;
            let report = run_scenario(&s).map_err(classify)?;
            let written = write_report(&report, &out, seed).map_err(classify)?;
            for path in written {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Simulate {
            config,
            pulses,
            seed,
        } => {
            let s = load_scenario(&config).map_err(classify)?;
            let rows = simulate_scenario(&s, pulses, seed).map_err(classify)?;
            write_simulation(&rows, io::stdout().lock())
                .context("writing simulation CSV")
                .map_err(Failure::Io)
        }
        Command::ListScenarios => {
            for name in builtin_names() {
                let s = load_scenario(name).map_err(classify)?;
                println!("{name}\t{}", s.description);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
