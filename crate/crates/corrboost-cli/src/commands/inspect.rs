use clap::Args;
use corrboost::Result;

use crate::dataspec::{DataSpec, DelimitedArgs};

/// Print dataset shape, geometry and class histogram.
#[derive(Debug, Args)]
pub struct InspectArgs {
    /// Dataset spec, e.g. mnist:IMAGES:LABELS or delimited:FILE.
    #[arg(long)]
    pub data: DataSpec,

    #[command(flatten)]
    pub delimited: DelimitedArgs,
}

pub fn run(args: &InspectArgs) -> Result<i32> {
    let ds = args.data.load(&args.delimited, None)?;
    match ds.geometry() {
        Some(g) => println!(
            "n={} d={} K={} geometry={}x{}x{}",
            ds.n(),
            ds.d(),
            ds.k(),
            g.height,
            g.width,
            g.channels
        ),
        None => println!("n={} d={} K={}", ds.n(), ds.d(), ds.k()),
    }
    println!("class histogram:");
    for (i, count) in ds.class_histogram().iter().enumerate() {
        println!("  {} ({}): {}", i + 1, ds.label_names()[i], count);
    }
    Ok(0)
}
