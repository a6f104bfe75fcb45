//! `pushci`: Push fixed-width confidence intervals from the command line.

mod cmd;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::cmd::batch::BatchArgs;
use crate::cmd::coverage::{CoverageArgs, Method};
use crate::cmd::push::{MinWidthArgs, PushArgs};
use crate::cmd::reproduce::ReproduceArgs;
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "pushci",
    version,
    about = "Shortest fixed-width confidence intervals for a bounded parameter"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the recursion at one width and print the interval function.
    Push(PushArgs),
    /// Find the smallest width at which an interval exists.
    Minwidth(MinWidthArgs),
    /// Coverage of the interval function at each grid parameter.
    Coverage(CoverageArgs),
    /// Same as `coverage --method mc`.
    Simulate(CoverageArgs),
    /// Minimal widths and intervals for every stratum of a CSV file.
    Batch(BatchArgs),
    /// Regenerate the data behind a table or figure.
    Reproduce(ReproduceArgs),
}

/// Thread pool capped at `jobs` workers.
pub fn pool(jobs: Option<usize>) -> CliResult<rayon::ThreadPool> {
    if jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker threads: {e}")))
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Push(args) => cmd::push::run_push(&args),
        Command::Minwidth(args) => cmd::push::run_minwidth(&args),
        Command::Coverage(args) => cmd::coverage::run(&args),
        Command::Simulate(mut args) => {
            args.method = Method::Mc;
            cmd::coverage::run(&args)
        }
        Command::Batch(args) => cmd::batch::run(&args),
        Command::Reproduce(args) => cmd::reproduce::run(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let first = text
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            eprintln!("error[invalid-args]: {first}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {message}", e.code());
            ExitCode::from(e.exit_status())
        }
    }
}
