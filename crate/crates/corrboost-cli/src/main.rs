//! Command-line surface for the correlation-feature + boosting pipeline:
//! dataset inspection, feature-pipeline fitting, training, evaluation and
//! importance/mask export.
//!
//! Exit codes: 0 success, 2 usage, 3 io, 4 file/schema, 5 numeric abort.

use clap::{Parser, Subcommand};

mod commands;
mod dataspec;
mod kvfile;

use commands::{build_features, evaluate, importance, inspect, train};

#[derive(Parser)]
#[command(
    name = "corrboost",
    version,
    about = "Correlation-built neighborhood/edge features and AdaBoost.MH with Hamming trees"
)]
struct Cli {
    /// Cap the worker thread count (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print dataset shape, geometry and class histogram.
    Inspect(inspect::InspectArgs),
    /// Fit the neighborhood/edge feature pipeline and write a transform file.
    BuildFeatures(build_features::BuildFeaturesArgs),
    /// Boost Hamming trees and write model, learning curve and run config.
    Train(train::TrainArgs),
    /// Report a model's error on a labeled dataset.
    Evaluate(evaluate::EvaluateArgs),
    /// Rank features by boosting coefficient mass and export masks.
    Importance(importance::ImportanceArgs),
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
        {
            log::warn!("could not cap worker threads: {e}");
        }
    }
    let result = match &cli.command {
        Command::Inspect(args) => inspect::run(args),
        Command::BuildFeatures(args) => build_features::run(args),
        Command::Train(args) => train::run(args),
        Command::Evaluate(args) => evaluate::run(args),
        Command::Importance(args) => importance::run(args),
    };
    match result {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_class());
        }
    }
}
