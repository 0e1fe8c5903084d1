//! `emotune` command-line interface.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 validation
//! error, 3 infrastructure error.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::PolicySource;
use config::RunArgs;
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "emotune", version, about = "Optimize creditor emotion policies for simulated debt negotiations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic scenario file.
    GenerateScenarios {
        /// Number of cases.
        #[arg(long, short, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the cases as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the optimizer and write a run directory.
    Optimize {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, required_unless_present = "dry_run")]
        out: Option<PathBuf>,
        /// Print the resolved config and exit.
        #[arg(long)]
        dry_run: bool,
    },
    /// Evaluate a policy over every scenario and profile.
    Evaluate {
        #[command(flatten)]
        run: RunArgs,
        /// `priors`, `random`, a matrix file (CSV or JSON) or a run directory.
        #[arg(long, default_value = "priors")]
        policy: PolicySource,
        /// Seeded repetitions; overrides the config file.
        #[arg(long)]
        repeats: Option<usize>,
        /// Directory for metrics, outcomes and transcripts.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a stored transcript and check its outcome and reward.
    Replay { transcript: PathBuf },
    /// Summarize a run directory.
    Report {
        run_dir: PathBuf,
        /// Write the best-matrix heatmap here.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::GenerateScenarios { n, seed, out, csv } => commands::generate(n as usize, seed, &out, csv.as_deref()),
        Command::Optimize { run, out, dry_run } => {
            let out = out.unwrap_or_default();
            commands::optimize_cmd(&run, &out, dry_run)
        }
        Command::Evaluate { run, policy, repeats, out } => {
            commands::evaluate_cmd(&run, repeats, &policy, out.as_deref())
        }
        Command::Replay { transcript } => commands::replay(&transcript),
        Command::Report { run_dir, svg } => commands::report(&run_dir, svg.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
