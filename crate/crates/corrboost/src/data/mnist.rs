//! IDX (MNIST-style) image/label pair loader. Big-endian headers, magic
//! numbers 0x00000803 (images) and 0x00000801 (labels). Pixel bytes map to
//! reals in [0, 1] by dividing by 255; label bytes 0..=9 map to classes
//! 1..=10.

use std::path::Path;

use crate::data::{Dataset, Geometry, Matrix};
use crate::error::{Error, Result};

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

fn be_u32(bytes: &[u8], offset: usize, path: &Path) -> Result<u32> {
    let end = offset + 4;
    if bytes.len() < end {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            detail: format!("header field at byte {offset} missing"),
        });
    }
    Ok(u32::from_be_bytes([
        bytes[offset],
        bytes[offset + 1],
        bytes[offset + 2],
        bytes[offset + 3],
    ]))
}

pub fn load_mnist_idx(image_path: &Path, label_path: &Path) -> Result<Dataset> {
    let image_bytes = std::fs::read(image_path).map_err(|e| Error::io(image_path, e))?;
    let label_bytes = std::fs::read(label_path).map_err(|e| Error::io(label_path, e))?;

    let magic = be_u32(&image_bytes, 0, image_path)?;
    if magic != IMAGE_MAGIC {
        return Err(Error::BadMagic {
            path: image_path.to_path_buf(),
            expected: IMAGE_MAGIC,
            found: magic,
        });
    }
    let n = be_u32(&image_bytes, 4, image_path)? as usize;
    let rows = be_u32(&image_bytes, 8, image_path)? as usize;
    let cols = be_u32(&image_bytes, 12, image_path)? as usize;
    let d = rows * cols;
    let needed = 16 + n * d;
    if image_bytes.len() < needed {
        return Err(Error::Truncated {
            path: image_path.to_path_buf(),
            detail: format!(
                "{n} images of {rows}x{cols} need {needed} bytes, file has {}",
                image_bytes.len()
            ),
        });
    }

    let magic = be_u32(&label_bytes, 0, label_path)?;
    if magic != LABEL_MAGIC {
        return Err(Error::BadMagic {
            path: label_path.to_path_buf(),
            expected: LABEL_MAGIC,
            found: magic,
        });
    }
    let n_labels = be_u32(&label_bytes, 4, label_path)? as usize;
    if n_labels != n {
        return Err(Error::CountMismatch {
            images: n,
            labels: n_labels,
        });
    }
    if label_bytes.len() < 8 + n {
        return Err(Error::Truncated {
            path: label_path.to_path_buf(),
            detail: format!(
                "{n} labels need {} bytes, file has {}",
                8 + n,
                label_bytes.len()
            ),
        });
    }

    let mut x = Vec::with_capacity(n * d);
    x.extend(
        image_bytes[16..16 + n * d]
            .iter()
            .map(|&b| b as f64 / 255.0),
    );

    let mut y = Vec::with_capacity(n);
    for (i, &b) in label_bytes[8..8 + n].iter().enumerate() {
        if b > 9 {
            return Err(Error::Format {
                path: label_path.to_path_buf(),
                detail: format!("label byte {b} at index {i} outside 0..=9"),
            });
        }
        y.push(b as u32 + 1);
    }

    let label_names = (0..10).map(|digit| digit.to_string()).collect();
    Dataset::new(
        Matrix::from_vec(x, n, d)?,
        y,
        10,
        Some(Geometry {
            height: rows,
            width: cols,
            channels: 1,
        }),
        label_names,
    )
}
