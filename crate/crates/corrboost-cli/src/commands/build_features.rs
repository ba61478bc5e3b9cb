use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use clap::Args;
use corrboost::boost::autoassociative_select;
use corrboost::data::subsample_instances;
use corrboost::features::{
    edge_mask_images, neighborhood_mask_images, save_transform, write_edge_members,
    write_neighborhood_members, FeatureTransform, TransformConfig,
};
use corrboost::{Error, Result};
use serde_json::json;

use crate::commands::{ensure_dir, write_run_config};
use crate::dataspec::{DataSpec, DelimitedArgs};
use crate::kvfile::{resolve, resolve_opt, KvFile};

/// Fit the neighborhood/edge feature pipeline and write the transform file.
#[derive(Debug, Args)]
pub struct BuildFeaturesArgs {
    /// Training dataset spec.
    #[arg(long)]
    pub data: Option<DataSpec>,

    #[command(flatten)]
    pub delimited: DelimitedArgs,

    /// Neighborhood correlation thresholds ρ_N, comma separated, each in (0,1).
    #[arg(long)]
    pub rho_n: Option<String>,

    /// Edge correlation threshold ρ_E.
    #[arg(long)]
    pub rho_e: Option<f64>,

    /// Correlation subsample size m (defaults to min(1000, n)).
    #[arg(long, short = 'm')]
    pub subsample: Option<usize>,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Feature standardization: auto (on for non-image data), on, off.
    #[arg(long)]
    pub normalize: Option<String>,

    /// Run autoassociative selection for this many iterations first.
    #[arg(long)]
    pub taa: Option<usize>,

    #[arg(long)]
    pub out_dir: Option<PathBuf>,

    /// Write neighborhood/edge member CSVs and, with geometry, PGM masks.
    #[arg(long)]
    pub export_masks: bool,

    /// Write the input and neighborhood correlation matrices as CSV.
    #[arg(long)]
    pub export_correlation: bool,

    /// Flat key-value config file; explicit flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn parse_rho_list(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("bad threshold {tok:?} in rho-n list")))
        })
        .collect()
}

pub fn run(args: &BuildFeaturesArgs) -> Result<i32> {
    let kv = match &args.config {
        Some(path) => Some(KvFile::load(path)?),
        None => None,
    };
    let kv = kv.as_ref();

    let data = resolve_opt(args.data.clone(), kv, "data")?
        .ok_or_else(|| Error::InvalidConfig("--data is required".into()))?;
    let rho_n_raw: String = resolve_opt(args.rho_n.clone(), kv, "rho-n")?
        .ok_or_else(|| Error::InvalidConfig("--rho-n is required".into()))?;
    let rho_n = parse_rho_list(&rho_n_raw)?;
    let rho_e = resolve_opt(args.rho_e, kv, "rho-e")?
        .ok_or_else(|| Error::InvalidConfig("--rho-e is required".into()))?;
    let seed = resolve(args.seed, kv, "seed", 1u64)?;
    let taa = resolve_opt(args.taa, kv, "taa")?;
    let normalize_mode: String = resolve(args.normalize.clone(), kv, "normalize", "auto".into())?;
    let out_dir = resolve_opt(args.out_dir.clone(), kv, "out-dir")?
        .ok_or_else(|| Error::InvalidConfig("--out-dir is required".into()))?;

    let ds = data.load(&args.delimited, None)?;
    let subsample = match resolve_opt(args.subsample, kv, "subsample")? {
        Some(m) => m,
        None => {
            let m = ds.n().min(1000);
            log::info!("correlation subsample defaults to {m}");
            m
        }
    };
    let normalize = match normalize_mode.as_str() {
        "on" => true,
        "off" => false,
        "auto" => ds.geometry().is_none(),
        other => {
            return Err(Error::InvalidConfig(format!(
                "normalize must be auto, on or off, got {other:?}"
            )))
        }
    };

    let selected = match taa {
        Some(t_aa) => {
            let x_sub = subsample_instances(&ds, subsample, seed)?;
            let picked = autoassociative_select(&x_sub, t_aa)?;
            println!(
                "autoassociative selection: {} distinct features after {} iterations",
                picked.len(),
                t_aa
            );
            Some(picked)
        }
        None => None,
    };

    let cfg = TransformConfig {
        subsample,
        seed,
        neighborhood_thresholds: rho_n.clone(),
        edge_threshold: rho_e,
        normalize,
        selected,
    };
    let report = FeatureTransform::fit_report(&ds, &cfg)?;
    let transform = &report.transform;

    ensure_dir(&out_dir)?;
    let transform_path = out_dir.join("transform.json");
    save_transform(transform, &transform_path)?;
    println!(
        "report: {} neighborhood features, {} edge features ({} selected inputs)",
        transform.neighborhood_count(),
        transform.edge_count(),
        transform.neighborhoods.selected.len()
    );
    println!("transform written to {}", transform_path.display());

    if args.export_correlation {
        for (name, matrix) in [
            ("correlation-input.csv", &report.input_correlation),
            (
                "correlation-neighborhood.csv",
                &report.neighborhood_correlation,
            ),
        ] {
            let path = out_dir.join(name);
            let mut w = BufWriter::new(File::create(&path).map_err(|e| Error::io(&path, e))?);
            matrix
                .write_delimited(&mut w, ',')
                .map_err(|e| Error::io(&path, e))?;
        }
        println!("correlation matrices exported");
    }

    if args.export_masks {
        export_masks(transform, &out_dir)?;
    }

    write_run_config(
        &out_dir,
        &json!({
            "command": "build-features",
            "data": data.describe(),
            "delimiter": args.delimited.delimiter.to_string(),
            "label_column": args.delimited.label_column,
            "header": args.delimited.header,
            "rho_n": rho_n,
            "rho_e": rho_e,
            "subsample": subsample,
            "seed": seed,
            "normalize": normalize,
            "taa": taa,
            "out_dir": out_dir.display().to_string(),
            "export_masks": args.export_masks,
            "export_correlation": args.export_correlation,
        }),
    )?;
    Ok(0)
}

fn export_masks(transform: &FeatureTransform, out_dir: &std::path::Path) -> Result<()> {
    let path = out_dir.join("neighborhood-members.csv");
    let mut w = BufWriter::new(File::create(&path).map_err(|e| Error::io(&path, e))?);
    write_neighborhood_members(transform, &mut w, ',').map_err(|e| Error::io(&path, e))?;

    let path = out_dir.join("edge-members.csv");
    let mut w = BufWriter::new(File::create(&path).map_err(|e| Error::io(&path, e))?);
    write_edge_members(transform, &mut w, ',').map_err(|e| Error::io(&path, e))?;

    if let Some(geometry) = transform.geometry {
        let mask_dir = out_dir.join("masks");
        ensure_dir(&mask_dir)?;
        let single = geometry.channels == 1;
        for id in 0..transform.neighborhood_count() {
            for img in neighborhood_mask_images(transform, id).unwrap() {
                let name = if single {
                    format!("neighborhood_{id:04}.pgm")
                } else {
                    format!("neighborhood_{id:04}_c{}.pgm", img.channel)
                };
                img.write_pgm(&mask_dir.join(name))?;
            }
        }
        for id in 0..transform.edge_count() {
            for img in edge_mask_images(transform, id).unwrap() {
                let name = if single {
                    format!("edge_{id:04}.pgm")
                } else {
                    format!("edge_{id:04}_c{}.pgm", img.channel)
                };
                img.write_pgm(&mask_dir.join(name))?;
            }
        }
        println!("masks written to {}", mask_dir.display());
    } else {
        println!("no geometry; member CSVs written, no mask images");
    }
    Ok(())
}
