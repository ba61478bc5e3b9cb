use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use clap::Args;
use corrboost::boost::{
    save_ensemble, train, EvalSet, SpaceSchema, TrainConfig, TrainJob, WeightInit,
};
use corrboost::data::Dataset;
use corrboost::features::{load_transform, save_transform};
use corrboost::space::SpaceRegistry;
use corrboost::{Error, Result};
use serde_json::json;

use crate::commands::{ensure_dir, write_run_config};
use crate::dataspec::{DataSpec, DelimitedArgs};
use crate::kvfile::{resolve, resolve_opt, KvFile};

/// Boost Hamming trees over a feature space and write model + curve.
#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training dataset spec.
    #[arg(long)]
    pub data: Option<DataSpec>,

    /// Held-out dataset spec for the test curve.
    #[arg(long)]
    pub test: Option<DataSpec>,

    #[command(flatten)]
    pub delimited: DelimitedArgs,

    /// Feature space: raw, constructed or haar.
    #[arg(long)]
    pub mode: Option<String>,

    /// Fitted transform file (required for constructed mode).
    #[arg(long)]
    pub transform: Option<PathBuf>,

    /// Boosting iterations T.
    #[arg(long, short = 'T')]
    pub iterations: Option<usize>,

    /// Leaves per Hamming tree N.
    #[arg(long, short = 'N')]
    pub leaves: Option<usize>,

    /// Random candidate features per split d'. Defaults to the full pool for
    /// raw/constructed; required for haar.
    #[arg(long)]
    pub d_prime: Option<usize>,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Evaluate the test curve every this many iterations.
    #[arg(long)]
    pub curve_cadence: Option<usize>,

    /// Weight initialization: standard or uniform.
    #[arg(long)]
    pub weight_init: Option<String>,

    /// Train on a seeded subsample of this many instances.
    #[arg(long)]
    pub train_subsample: Option<usize>,

    #[arg(long)]
    pub out_dir: Option<PathBuf>,

    /// Flat key-value config file; explicit flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn run(args: &TrainArgs) -> Result<i32> {
    let kv = match &args.config {
        Some(path) => Some(KvFile::load(path)?),
        None => None,
    };
    let kv = kv.as_ref();

    let data = resolve_opt(args.data.clone(), kv, "data")?
        .ok_or_else(|| Error::InvalidConfig("--data is required".into()))?;
    let test = resolve_opt(args.test.clone(), kv, "test")?;
    let mode: String = resolve(args.mode.clone(), kv, "mode", "raw".into())?;
    let transform_path = resolve_opt(args.transform.clone(), kv, "transform")?;
    let iterations = resolve(args.iterations, kv, "iterations", 100usize)?;
    let leaves = resolve(args.leaves, kv, "leaves", 8usize)?;
    let d_prime_flag = resolve_opt(args.d_prime, kv, "d-prime")?;
    let seed = resolve(args.seed, kv, "seed", 1u64)?;
    let curve_cadence = resolve_opt(args.curve_cadence, kv, "curve-cadence")?;
    let weight_init_raw: String = resolve(
        args.weight_init.clone(),
        kv,
        "weight-init",
        "standard".into(),
    )?;
    let train_subsample = resolve_opt(args.train_subsample, kv, "train-subsample")?;
    let out_dir = resolve_opt(args.out_dir.clone(), kv, "out-dir")?
        .ok_or_else(|| Error::InvalidConfig("--out-dir is required".into()))?;

    let weight_init = match weight_init_raw.as_str() {
        "standard" => WeightInit::Standard,
        "uniform" => WeightInit::Uniform,
        other => {
            return Err(Error::InvalidConfig(format!(
                "weight-init must be standard or uniform, got {other:?}"
            )))
        }
    };
    let registry = SpaceRegistry::builtin();
    if !registry.names().contains(&mode.as_str()) {
        return Err(Error::InvalidConfig(format!(
            "unknown mode {mode:?}; registered: {}",
            registry.names().join(", ")
        )));
    }

    let mut ds = data.load(&args.delimited, None)?;
    if let Some(m) = train_subsample {
        ds = ds.subsample_labeled(m, seed)?;
        log::info!("training on a {m}-instance subsample");
    }
    let missing = ds.missing_classes();
    if !missing.is_empty() {
        log::warn!("classes {missing:?} have no training instances");
    }

    let schema = match mode.as_str() {
        "raw" => SpaceSchema::Raw {
            dim: ds.d(),
            geometry: ds.geometry().copied(),
        },
        "constructed" => {
            let path = transform_path.clone().ok_or_else(|| {
                Error::InvalidConfig("constructed mode requires --transform".into())
            })?;
            SpaceSchema::Constructed {
                transform: load_transform(&path)?,
            }
        }
        "haar" => SpaceSchema::Haar {
            geometry: *ds
                .geometry()
                .ok_or_else(|| Error::InvalidConfig("haar mode requires image geometry".into()))?,
        },
        _ => unreachable!("validated against the registry"),
    };

    let space = schema.build(ds.matrix(), ds.geometry())?;
    let d_prime = match d_prime_flag {
        Some(d) => d,
        None => match space.pool_size() {
            Some(pool) if mode != "haar" => pool as usize,
            _ => {
                return Err(Error::InvalidConfig(
                    "--d-prime is required for haar mode".into(),
                ))
            }
        },
    };

    let test_ds: Option<Dataset> = match &test {
        Some(spec) => Some(spec.load(&args.delimited, Some(ds.label_names().to_vec()))?),
        None => None,
    };
    let test_space = match &test_ds {
        Some(t) => Some(schema.build(t.matrix(), t.geometry())?),
        None => None,
    };
    let test_labels = test_ds.as_ref().map(|t| t.label_code());

    let config = TrainConfig {
        iterations,
        leaves,
        d_prime,
        seed,
        curve_cadence,
        weight_init,
    };
    let labels = ds.label_code();
    let outcome = train(TrainJob {
        space: space.as_ref(),
        labels: &labels,
        config: config.clone(),
        schema,
        label_names: ds.label_names().to_vec(),
        eval: match (&test_space, &test_labels) {
            (Some(s), Some(l)) => Some(EvalSet {
                space: s.as_ref(),
                labels: l,
            }),
            _ => None,
        },
    })?;

    ensure_dir(&out_dir)?;
    let model_path = out_dir.join("model.json");
    save_ensemble(&outcome.ensemble, &model_path)?;
    let curve_path = out_dir.join("curve.csv");
    let mut w = BufWriter::new(File::create(&curve_path).map_err(|e| Error::io(&curve_path, e))?);
    outcome
        .curve
        .write_csv(&mut w)
        .map_err(|e| Error::io(&curve_path, e))?;
    drop(w);
    // The output directory must be self-sufficient for a re-run.
    if let Some(transform) = outcome.ensemble.schema.transform() {
        save_transform(transform, &out_dir.join("transform.json"))?;
    }

    write_run_config(
        &out_dir,
        &json!({
            "command": "train",
            "data": data.describe(),
            "test": test.as_ref().map(|t| t.describe()),
            "delimiter": args.delimited.delimiter.to_string(),
            "label_column": args.delimited.label_column,
            "header": args.delimited.header,
            "mode": mode,
            "transform": transform_path.as_ref().map(|p| p.display().to_string()),
            "iterations": iterations,
            "leaves": leaves,
            "d_prime": d_prime,
            "seed": seed,
            "curve_cadence": curve_cadence,
            "weight_init": weight_init_raw,
            "train_subsample": train_subsample,
            "out_dir": out_dir.display().to_string(),
        }),
    )?;

    let last = outcome.curve.points.last();
    let fmt_opt = |v: Option<f64>| v.map_or("-".to_string(), |e| format!("{e:.6}"));
    println!(
        "summary: stages={} final_train_error={} final_test_error={} mean_last_half_test_error={} elapsed_s={:.3}",
        outcome.ensemble.stages.len(),
        fmt_opt(last.map(|p| p.train_error)),
        fmt_opt(last.and_then(|p| p.test_error)),
        fmt_opt(outcome.curve.mean_test_error_last_half()),
        last.map_or(0.0, |p| p.elapsed_seconds),
    );
    println!("model written to {}", model_path.display());

    match outcome.aborted_at {
        Some(t) => {
            eprintln!("training aborted at iteration {t}: no learner with positive edge");
            Ok(5)
        }
        None => Ok(0),
    }
}
