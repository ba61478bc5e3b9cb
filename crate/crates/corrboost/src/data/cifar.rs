//! CIFAR-10 binary batch loader. Each record is 1 label byte followed by
//! 3072 pixel bytes in channel-planar order (1024 R, 1024 G, 1024 B),
//! row-major within a channel. Bytes scale to [0, 1].

use std::path::Path;

use crate::data::{Dataset, Geometry, Matrix};
use crate::error::{Error, Result};

const RECORD_LEN: usize = 3073;
const PIXELS: usize = 3072;

pub fn load_cifar10<P: AsRef<Path>>(batch_paths: &[P]) -> Result<Dataset> {
    if batch_paths.is_empty() {
        return Err(Error::InvalidConfig("no CIFAR-10 batch files given".into()));
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    for p in batch_paths {
        let path = p.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        if bytes.len() % RECORD_LEN != 0 {
            return Err(Error::Format {
                path: path.to_path_buf(),
                detail: format!(
                    "file length {} is not a multiple of the {RECORD_LEN}-byte record size",
                    bytes.len()
                ),
            });
        }
        for (r, record) in bytes.chunks_exact(RECORD_LEN).enumerate() {
            let label = record[0];
            if label > 9 {
                return Err(Error::Format {
                    path: path.to_path_buf(),
                    detail: format!("label byte {label} in record {r} outside 0..=9"),
                });
            }
            y.push(label as u32 + 1);
            x.extend(record[1..].iter().map(|&b| b as f64 / 255.0));
        }
    }
    let n = y.len();
    let label_names = (0..10).map(|c| c.to_string()).collect();
    Dataset::new(
        Matrix::from_vec(x, n, PIXELS)?,
        y,
        10,
        Some(Geometry {
            height: 32,
            width: 32,
            channels: 3,
        }),
        label_names,
    )
}
