use std::path::{Path, PathBuf};

use clap::Args;
use corrboost::boost::{feature_importance, load_ensemble, Ensemble, SpaceSchema};
use corrboost::data::Geometry;
use corrboost::features::{edge_mask_images, load_transform, neighborhood_mask_images, MaskImage};
use corrboost::haar::HaarFilter;
use corrboost::space::FeatureKey;
use corrboost::{Error, Result};

use crate::commands::ensure_dir;

/// Rank features by the sum of stage coefficients over the trees that use
/// them; optionally export mask images for the top of the ranking.
#[derive(Debug, Args)]
pub struct ImportanceArgs {
    /// Model file written by `train`.
    #[arg(long)]
    pub model: PathBuf,

    /// Transform file; must match the one embedded in a constructed-mode
    /// model.
    #[arg(long)]
    pub transform: Option<PathBuf>,

    /// How many features to report.
    #[arg(long, default_value_t = 100)]
    pub top_k: usize,

    /// Write PGM masks of the reported features here.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

fn describe(key: &FeatureKey, ensemble: &Ensemble) -> String {
    match key {
        FeatureKey::Haar(f) => format!(
            "haar {:?} {}x{} at ({},{}) channel {}",
            f.kind, f.width, f.height, f.x, f.y, f.channel
        ),
        FeatureKey::Column(c) => match &ensemble.schema {
            SpaceSchema::Constructed { transform } => {
                let q = transform.neighborhood_count();
                let c = *c as usize;
                if c < q {
                    format!(
                        "neighborhood {c} ({} members)",
                        transform.neighborhoods.members[c].len()
                    )
                } else {
                    let (a, b) = transform.edges.pairs[c - q];
                    format!("edge {} (z{a} - z{b})", c - q)
                }
            }
            SpaceSchema::Raw { geometry, .. } => match geometry {
                Some(g) => {
                    let (ch, row, col) = g.locate(*c as usize);
                    format!("column {c} (pixel ch{ch} r{row} c{col})")
                }
                None => format!("column {c}"),
            },
            SpaceSchema::Haar { .. } => format!("column {c}"),
        },
    }
}

pub fn run(args: &ImportanceArgs) -> Result<i32> {
    let ensemble = load_ensemble(&args.model)?;
    if let Some(path) = &args.transform {
        let external = load_transform(path)?;
        match ensemble.schema.transform() {
            Some(embedded) if *embedded != external => {
                return Err(Error::Schema(
                    "supplied transform differs from the one embedded in the model".into(),
                ));
            }
            Some(_) => {}
            None => log::warn!("model is not constructed-mode; --transform ignored"),
        }
    }

    let ranked = feature_importance(&ensemble);
    let k = args.top_k.min(ranked.len());
    if args.top_k > ranked.len() {
        println!(
            "note: model uses only {} distinct features; reporting all of them",
            ranked.len()
        );
    }

    let mut neighborhood_count = 0usize;
    let mut edge_count = 0usize;
    println!("rank,alpha_sum,feature");
    for (rank, (key, alpha)) in ranked.iter().take(k).enumerate() {
        if let (FeatureKey::Column(c), SpaceSchema::Constructed { transform }) =
            (key, &ensemble.schema)
        {
            if (*c as usize) < transform.neighborhood_count() {
                neighborhood_count += 1;
            } else {
                edge_count += 1;
            }
        }
        println!("{rank},{alpha},{}", describe(key, &ensemble));
    }
    if matches!(ensemble.schema, SpaceSchema::Constructed { .. }) {
        println!("top {k}: {neighborhood_count} neighborhood features, {edge_count} edge features");
    }

    if let Some(out_dir) = &args.out_dir {
        ensure_dir(out_dir)?;
        let mut written = 0usize;
        for (rank, (key, _)) in ranked.iter().take(k).enumerate() {
            written += export_mask(&ensemble, key, rank, out_dir)?;
        }
        if written > 0 {
            println!("{written} mask images written to {}", out_dir.display());
        } else {
            println!("no mask images for this model kind");
        }
    }
    Ok(0)
}

fn export_mask(
    ensemble: &Ensemble,
    key: &FeatureKey,
    rank: usize,
    out_dir: &Path,
) -> Result<usize> {
    match (key, &ensemble.schema) {
        (FeatureKey::Column(c), SpaceSchema::Constructed { transform }) => {
            let q = transform.neighborhood_count();
            let c = *c as usize;
            let (images, stem) = if c < q {
                (
                    neighborhood_mask_images(transform, c),
                    format!("rank_{rank:04}_neighborhood_{c:04}"),
                )
            } else {
                (
                    edge_mask_images(transform, c - q),
                    format!("rank_{rank:04}_edge_{:04}", c - q),
                )
            };
            write_images(images, transform.geometry.as_ref(), &stem, out_dir)
        }
        (
            FeatureKey::Column(c),
            SpaceSchema::Raw {
                geometry: Some(g), ..
            },
        ) => {
            let mut pixels = vec![0u8; g.height * g.width];
            let (ch, row, col) = g.locate(*c as usize);
            pixels[row * g.width + col] = 255;
            let img = MaskImage {
                channel: ch,
                width: g.width,
                height: g.height,
                pixels,
            };
            let stem = format!("rank_{rank:04}_pixel_{c:04}");
            write_images(Some(vec![img]), Some(g), &stem, out_dir)
        }
        (FeatureKey::Haar(f), SpaceSchema::Haar { geometry }) => {
            let stem = format!("rank_{rank:04}_haar");
            write_images(
                Some(vec![haar_footprint(f, geometry)]),
                Some(geometry),
                &stem,
                out_dir,
            )
        }
        _ => Ok(0),
    }
}

/// Footprint sketch of a filter: its whole rectangle at full level.
fn haar_footprint(f: &HaarFilter, g: &Geometry) -> MaskImage {
    let mut pixels = vec![0u8; g.height * g.width];
    for y in f.y..f.y + f.height {
        for x in f.x..f.x + f.width {
            pixels[y as usize * g.width + x as usize] = 255;
        }
    }
    MaskImage {
        channel: f.channel as usize,
        width: g.width,
        height: g.height,
        pixels,
    }
}

fn write_images(
    images: Option<Vec<MaskImage>>,
    geometry: Option<&Geometry>,
    stem: &str,
    out_dir: &Path,
) -> Result<usize> {
    let Some(images) = images else { return Ok(0) };
    let single_channel = geometry.is_some_and(|g| g.channels == 1);
    let mut written = 0;
    for img in images {
        let name = if single_channel {
            format!("{stem}.pgm")
        } else {
            format!("{stem}_c{}.pgm", img.channel)
        };
        img.write_pgm(&out_dir.join(name))?;
        written += 1;
    }
    Ok(written)
}
