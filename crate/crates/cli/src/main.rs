//! `helpdp`: plan when to ask for help, and evaluate the plan in the ring-of-rooms
//! simulator.

mod commands;
mod config;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, ValueEnum};
use helpdp_core::planner::ThresholdVariant;

use crate::config::{Overrides, RunConfig};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    /// Generate the train/val/test task splits.
    Gen,
    /// Roll out the phase-1 schedule on the training tasks.
    Collect,
    /// Estimate transition and success models.
    Fit,
    /// Solve for a fixed cost vector.
    Solve,
    /// Search the cost scale that meets the usage budget.
    Search,
    /// Turn the solution into a deployable helper table.
    Annotate,
    /// Run the helper on an evaluation split.
    Eval,
    /// Check the planner against exhaustive policy enumeration.
    Oracle,
    /// Evaluate a heuristic baseline.
    Baseline,
    /// Score self-regulation (predicting failure from success estimates).
    Selfreg,
}

#[derive(Parser, Debug)]
#[command(name = "helpdp", version, about)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Usage budget for `search`.
    #[arg(long, conflicts_with = "r")]
    budget: Option<f64>,
    /// Help costs, one per intervention (comma separated).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    r: Option<Vec<f64>>,
    /// `value_consistent` or `paper_literal`.
    #[arg(long)]
    variant: Option<ThresholdVariant>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<()> {
    commands::init_workers()?;
    let overrides = Overrides {
        seed: cli.seed,
        budget: cli.budget,
        r: cli.r,
        variant: cli.variant,
        out: cli.out,
    };
    let cfg = RunConfig::load(&cli.config, &overrides)?;
    match cli.command {
        Command::Gen => commands::gen(&cfg),
        Command::Collect => commands::collect(&cfg),
        Command::Fit => commands::fit(&cfg),
        Command::Solve => commands::solve_cmd(&cfg),
        Command::Search => commands::search(&cfg),
        Command::Annotate => commands::annotate(&cfg),
        Command::Eval => commands::eval(&cfg),
        Command::Oracle => commands::oracle(&cfg),
        Command::Baseline => commands::baseline(&cfg),
        Command::Selfreg => commands::selfreg(&cfg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit::code(&err) as u8)
        }
    }
}
