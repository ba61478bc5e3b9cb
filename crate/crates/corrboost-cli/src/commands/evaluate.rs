use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::Args;
use corrboost::boost::{evaluate, load_ensemble, replay_curve};
use corrboost::{Error, Result};

use crate::dataspec::{DataSpec, DelimitedArgs};

/// Report the multiclass zero-one error of a model on a labeled dataset.
#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Model file written by `train`.
    #[arg(long)]
    pub model: PathBuf,

    /// Dataset spec.
    #[arg(long)]
    pub data: DataSpec,

    #[command(flatten)]
    pub delimited: DelimitedArgs,

    /// Also replay the per-iteration curve on this dataset to a CSV file.
    #[arg(long)]
    pub curve_out: Option<PathBuf>,
}

pub fn run(args: &EvaluateArgs) -> Result<i32> {
    let ensemble = load_ensemble(&args.model)?;
    let ds = args
        .data
        .load(&args.delimited, Some(ensemble.label_names.clone()))?;
    let eval = evaluate(&ensemble, &ds)?;
    println!(
        "error={:.6} ({}/{} misclassified, {} stages)",
        eval.error,
        eval.errors,
        eval.n,
        ensemble.stages.len()
    );

    if let Some(path) = &args.curve_out {
        let errors = replay_curve(&ensemble, &ds)?;
        let mut w = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
        writeln!(w, "iteration,error").map_err(|e| Error::io(path, e))?;
        for (i, e) in errors.iter().enumerate() {
            writeln!(w, "{},{}", i + 1, e).map_err(|e2| Error::io(path, e2))?;
        }
        println!("replay curve written to {}", path.display());
    }
    Ok(0)
}
