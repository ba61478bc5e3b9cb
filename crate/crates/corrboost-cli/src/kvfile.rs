//! Flat key-value configuration files: one `key = value` per line, `#`
//! comments. Keys mirror the long flag names; explicit flags win over file
//! values.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use corrboost::{Error, Result};

#[derive(Debug, Default, Clone)]
pub struct KvFile {
    values: BTreeMap<String, String>,
}

impl KvFile {
    pub fn load(path: &Path) -> Result<KvFile> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut values = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                detail: format!("expected key = value, got {line:?}"),
            })?;
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(KvFile { values })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                Error::InvalidConfig(format!("config key {key} has unusable value {raw:?}"))
            }),
        }
    }
}

/// flag > config file > default.
pub fn resolve<T: FromStr>(
    flag: Option<T>,
    file: Option<&KvFile>,
    key: &str,
    default: T,
) -> Result<T> {
    resolve_opt(flag, file, key).map(|v| v.unwrap_or(default))
}

pub fn resolve_opt<T: FromStr>(
    flag: Option<T>,
    file: Option<&KvFile>,
    key: &str,
) -> Result<Option<T>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match file {
        Some(kv) => kv.get(key),
        None => Ok(None),
    }
}
