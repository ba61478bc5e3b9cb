use std::path::Path;

use corrboost::{Error, Result};

pub mod build_features;
pub mod evaluate;
pub mod importance;
pub mod inspect;
pub mod train;

/// Every run writes its fully resolved configuration next to its outputs.
pub fn write_run_config(out_dir: &Path, config: &serde_json::Value) -> Result<()> {
    let path = out_dir.join("run-config.json");
    let text = serde_json::to_string_pretty(config).expect("run config is always serializable");
    std::fs::write(&path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}
