//! Versioned JSON file format for trained ensembles. Loads reject format,
//! version and schema mismatches.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::boost::Ensemble;
use crate::error::{Error, Result};

const ENSEMBLE_FORMAT: &str = "corrboost-ensemble";
const ENSEMBLE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct EnsembleFile {
    format: String,
    version: u32,
    #[serde(flatten)]
    ensemble: Ensemble,
}

pub fn save_ensemble(ensemble: &Ensemble, path: &Path) -> Result<()> {
    let file = EnsembleFile {
        format: ENSEMBLE_FORMAT.to_string(),
        version: ENSEMBLE_VERSION,
        ensemble: ensemble.clone(),
    };
    let w = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    serde_json::to_writer_pretty(w, &file).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })
}

pub fn load_ensemble(path: &Path) -> Result<Ensemble> {
    let r = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
    let file: EnsembleFile = serde_json::from_reader(r).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    if file.format != ENSEMBLE_FORMAT || file.version != ENSEMBLE_VERSION {
        return Err(Error::Schema(format!(
            "expected {ENSEMBLE_FORMAT} v{ENSEMBLE_VERSION}, found {} v{}",
            file.format, file.version
        )));
    }
    if file
        .ensemble
        .stages
        .iter()
        .any(|s| !s.alpha.is_finite() || s.alpha <= 0.0)
    {
        return Err(Error::Schema("non-positive stage coefficient".into()));
    }
    Ok(file.ensemble)
}
