//! Versioned JSON file format for fitted transforms.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureTransform;

const TRANSFORM_FORMAT: &str = "corrboost-transform";
const TRANSFORM_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct TransformFile {
    format: String,
    version: u32,
    #[serde(flatten)]
    transform: FeatureTransform,
}

pub fn save_transform(transform: &FeatureTransform, path: &Path) -> Result<()> {
    let file = TransformFile {
        format: TRANSFORM_FORMAT.to_string(),
        version: TRANSFORM_VERSION,
        transform: transform.clone(),
    };
    let w = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    serde_json::to_writer_pretty(w, &file).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })
}

pub fn load_transform(path: &Path) -> Result<FeatureTransform> {
    let r = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
    let file: TransformFile = serde_json::from_reader(r).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    if file.format != TRANSFORM_FORMAT || file.version != TRANSFORM_VERSION {
        return Err(Error::Schema(format!(
            "expected {TRANSFORM_FORMAT} v{TRANSFORM_VERSION}, found {} v{}",
            file.format, file.version
        )));
    }
    Ok(file.transform)
}
