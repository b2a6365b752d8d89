use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sparsemap_cli::config::ConfigFile;
use sparsemap_cli::output::{to_json_pretty, write_fig1, write_json, write_records};
use sparsemap_cli::{commands, CliError};

#[derive(Debug, Parser)]
#[command(
    name = "sparsemap",
    version,
    about = "Sparse support recovery experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the closed-form recovery constants and probabilities as JSON.
    Constants {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        beta_bar: Option<f64>,
    },
    /// Write the energy-bound constant and its probability over a β grid as CSV.
    Fig1 {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1.1)]
        beta_min: f64,
        #[arg(long, default_value_t = 4.0)]
        beta_max: f64,
        #[arg(long, default_value_t = 30)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a Monte Carlo campaign; write one JSON record per trial.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the aggregate summary here (printed to stdout otherwise).
        #[arg(long)]
        aggregate: Option<PathBuf>,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Estimate the restricted isometry constant of a seeded sensing matrix.
    VerifyRip {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        level: usize,
        /// Random supports to sample instead of enumerating all of them.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check the near-orthogonality inequalities on random disjoint supports.
    CheckPropositions {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        level: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
    },
}

fn load(path: &Path) -> Result<ConfigFile, CliError> {
    ConfigFile::load(path)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Constants {
            config,
            beta,
            beta_bar,
        } => {
            let report = commands::constants(&load(&config)?, beta, beta_bar)?;
            print!("{}", to_json_pretty(&report));
        }
        Command::Fig1 {
            config,
            beta_min,
            beta_max,
            steps,
            out,
        } => {
            let rows = commands::fig1(&load(&config)?, beta_min, beta_max, steps)?;
            write_fig1(&out, &rows)?;
        }
        Command::Simulate {
            config,
            out,
            aggregate,
            threads,
        } => {
            let run = commands::simulate(&load(&config)?, threads)?;
            for f in &run.failures {
                eprintln!("trial {} failed: {}", f.trial_id, f.message);
            }
            write_records(&out, run.records())?;
            match aggregate {
                Some(path) => write_json(&path, &run.aggregate)?,
                None => print!("{}", to_json_pretty(&run.aggregate)),
            }
        }
        Command::VerifyRip {
            config,
            level,
            samples,
            seed,
        } => {
            let est = commands::verify_rip(&load(&config)?, level, samples, seed)?;
            print!("{}", to_json_pretty(&est));
        }
        Command::CheckPropositions {
            config,
            seed,
            level,
            samples,
        } => {
            let report = commands::propositions(&load(&config)?, seed, level, samples)?;
            print!("{}", to_json_pretty(&report));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
