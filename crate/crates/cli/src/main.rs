//! Batch front end: config ingestion, verification orchestration, and
//! stable JSON reporting.
//!
//! Exit codes: 0 on success, 1 on a mathematical failure, 2 on a usage or
//! configuration error.

mod checks;
mod commands;
mod config;
mod report;

use clap::{Args, Parser, Subcommand};
use config::{Job, JobConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    /// Usage or configuration problem; exit code 2.
    Config(String),
    /// A mathematical claim failed or input data is mathematically
    /// inconsistent; exit code 1.
    Math(String),
}

#[derive(Parser)]
#[command(
    name = "takiff",
    version,
    about = "Exact invariant theory on truncated multicurrent Lie algebras"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Job configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (report file, or directory for `generators`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the invariant generator families as JSON files.
    Generators {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the verification suite and write a deterministic report.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated subset of checks to run.
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
        /// Use symbolic Jacobian rank instead of seeded evaluation.
        #[arg(long)]
        exact_rank: bool,
    },
    /// Conjugate a regular element onto the slice.
    Reduce {
        #[command(flatten)]
        common: CommonArgs,
        /// Element file (JSON coordinates).
        element: PathBuf,
    },
    /// Report the sampled index and the regular-form criterion.
    Index {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Report the graded bilinear form checks.
    Forms {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Cross-check invariance by raw derivation application.
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn build_job(common: &CommonArgs) -> Result<Job, CliError> {
    let config = JobConfig::load(&common.config)?;
    Job::build(config, common.seed)
}

fn run() -> Result<i32, CliError> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Generators { common } => {
            let job = build_job(common)?;
            let out = common.out.clone().or_else(|| job.output.clone());
            commands::cmd_generators(&job, out.as_deref())
        }
        Command::Verify {
            common,
            checks,
            exact_rank,
        } => {
            let job = build_job(common)?;
            let out = common.out.clone().or_else(|| job.output.clone());
            let selected = checks.clone().or_else(|| job.checks.clone());
            commands::cmd_verify(&job, selected, *exact_rank, out.as_deref())
        }
        Command::Reduce { common, element } => {
            let job = build_job(common)?;
            let out = common.out.clone().or_else(|| job.output.clone());
            commands::cmd_reduce(&job, element, out.as_deref())
        }
        Command::Index { common } => {
            let job = build_job(common)?;
            let out = common.out.clone().or_else(|| job.output.clone());
            commands::cmd_index(&job, out.as_deref())
        }
        Command::Forms { common } => {
            let job = build_job(common)?;
            let out = common.out.clone().or_else(|| job.output.clone());
            commands::cmd_forms(&job, out.as_deref())
        }
        Command::Oracle { common } => {
            let job = build_job(common)?;
            let out = common.out.clone().or_else(|| job.output.clone());
            commands::cmd_oracle(&job, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(CliError::Math(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
