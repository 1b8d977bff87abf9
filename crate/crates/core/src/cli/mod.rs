//! Job files, built-in operators and the command line driver.

mod build;
mod run;
mod selftest;
mod spec;

pub use build::{bound_config, build_operator, BuiltOperator};
pub use run::{
    bench_stream, contour_text, embedded_job, grid_text, header, records_json, run, BenchMode, BenchRecord, RunSummary,
};
pub use selftest::{selftest, CheckResult};
pub use spec::{BenchSpec, BoundsSpec, ContourSpec, GridSpec, ImpuritySpec, JobSpec, OperatorSpec, SymbolSpec, Task};

use crate::error::Error;
use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "pseudospec", version, about = "Certified pseudospectrum enclosures for band operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct JobArgs {
    /// TOML job file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a job key, e.g. `--set bounds.blocks=100`. Later flags win.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub sets: Vec<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 uses every core).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trace the boundaries of the lower and upper sets for each eps.
    Contour(JobArgs),
    /// Evaluate and classify a rectangular grid.
    Grid(JobArgs),
    /// Time recycled, restarted and fresh factorizations.
    Bench(JobArgs),
    /// Run the built-in oracle checks.
    Selftest(JobArgs),
}

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. }
        | Error::InvalidOperator(_)
        | Error::ImpurityOutsideBand { .. }
        | Error::OffsetOutsideBand { .. } => 1,
        Error::Io { .. } => 3,
        _ => 2,
    }
}

/// Parse, run and report; returns the exit status.
pub fn main_with(cli: Cli) -> i32 {
    let (task, args) = match cli.command {
        Command::Contour(a) => (Task::Contour, a),
        Command::Grid(a) => (Task::Grid, a),
        Command::Bench(a) => (Task::Bench, a),
        Command::Selftest(a) => (Task::Selftest, a),
    };
    let mut sets = args.sets.clone();
    if let Some(out) = &args.out {
        sets.push(format!("out={:?}", out.display().to_string()));
    }
    if let Some(t) = args.threads {
        sets.push(format!("threads={t}"));
    }
    let job = match JobSpec::load(args.config.as_deref(), &sets, Some(task)) {
        Ok(j) => j,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    match run(&job) {
        Ok(summary) => {
            for line in &summary.lines {
                println!("{line}");
            }
            if summary.passed {
                0
            } else {
                2
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
