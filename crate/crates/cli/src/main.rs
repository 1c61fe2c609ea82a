//! `pseudolin`: F-measure optimization experiments from the command line.

mod output;
mod tools;
mod train;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tools::{EvaluateArgs, GalaxyArgs, ParetoArgs};
use train::{Task, TrainArgs};

#[derive(Parser)]
#[command(name = "pseudolin", version, about = "F-measure optimization by cost-sensitive linear classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Binary F-beta (or Jaccard) over a cost grid.
    TrainBinary(TrainArgs),
    /// Macro F by one binary search per label.
    TrainMacro(TrainArgs),
    /// Micro F with a shared cost level and least-cost per-label selection.
    TrainMicro(TrainArgs),
    /// Scores a saved model on a dataset.
    Evaluate(EvaluateArgs),
    /// Enumerates every classifier of a finite distribution and checks the
    /// cost reduction on it.
    ParetoDemo(ParetoArgs),
    /// Writes a synthetic four-cluster sample.
    GalaxyGen(GalaxyArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let train = |task: Task, args: &TrainArgs, name: &str| {
        train::run(task, args, name).map(|all| if all { ExitCode::SUCCESS } else { ExitCode::from(2) })
    };
    let result = match &cli.command {
        Command::TrainBinary(a) => train(Task::Binary, a, "train-binary"),
        Command::TrainMacro(a) => train(Task::Macro, a, "train-macro"),
        Command::TrainMicro(a) => train(Task::Micro, a, "train-micro"),
        Command::Evaluate(a) => tools::evaluate_cmd(a).map(|()| ExitCode::SUCCESS),
        Command::ParetoDemo(a) => tools::pareto_demo(a).map(|()| ExitCode::SUCCESS),
        Command::GalaxyGen(a) => tools::galaxy_gen(a).map(|()| ExitCode::SUCCESS),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::FAILURE
    })
}
