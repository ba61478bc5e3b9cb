//! Dataset representation, ingestion, label coding, normalization and
//! deterministic subsampling/splitting.
//!
//! Instances live in a dense row-major [`Matrix`]; labels are 1-based class
//! indices `1..=K`. Loaders for the supported file formats are in the
//! submodules; the JSON interchange format round-trips `X` and `y`
//! bit-exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod cifar;
mod delimited;
mod matrix;
mod mnist;

pub use cifar::load_cifar10;
pub use delimited::{load_delimited, DelimitedOptions};
pub use matrix::Matrix;
pub use mnist::load_mnist_idx;

/// Image layout of a raw feature vector: `height * width * channels = d`.
/// Multi-channel data is channel-planar (all of channel 0, then channel 1, …),
/// row-major within a channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Geometry {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
}

impl Geometry {
    pub fn pixel_count(&self) -> usize {
        self.height * self.width * self.channels
    }

    /// (channel, row, column) of a raw feature index.
    pub fn locate(&self, feature: usize) -> (usize, usize, usize) {
        let plane = self.height * self.width;
        let ch = feature / plane;
        let rest = feature % plane;
        (ch, rest / self.width, rest % self.width)
    }
}

/// A labeled dataset: instance matrix `X` (n×d) plus labels `y` in `1..=K`.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: Matrix,
    y: Vec<u32>,
    k: usize,
    geometry: Option<Geometry>,
    label_names: Vec<String>,
}

impl Dataset {
    /// Validates the dataset invariants: label range, finite features, and
    /// geometry consistency. Class completeness is not enforced here; use
    /// [`Dataset::missing_classes`] to check it where it matters.
    pub fn new(
        x: Matrix,
        y: Vec<u32>,
        k: usize,
        geometry: Option<Geometry>,
        label_names: Vec<String>,
    ) -> Result<Self> {
        if y.len() != x.rows() {
            return Err(Error::DimensionMismatch {
                what: "label vector",
                expected: x.rows(),
                found: y.len(),
            });
        }
        if k == 0 || label_names.len() != k {
            return Err(Error::InvalidConfig(format!(
                "class count {} does not match {} label names",
                k,
                label_names.len()
            )));
        }
        if let Some(&bad) = y.iter().find(|&&c| c == 0 || c as usize > k) {
            return Err(Error::Schema(format!("label {bad} outside 1..={k}")));
        }
        if x.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::Schema("non-finite feature value".into()));
        }
        if let Some(g) = &geometry {
            if g.pixel_count() != x.cols() {
                return Err(Error::DimensionMismatch {
                    what: "geometry",
                    expected: x.cols(),
                    found: g.pixel_count(),
                });
            }
        }
        Ok(Dataset {
            x,
            y,
            k,
            geometry,
            label_names,
        })
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn d(&self) -> usize {
        self.x.cols()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn geometry(&self) -> Option<&Geometry> {
        self.geometry.as_ref()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.x
    }

    pub fn labels(&self) -> &[u32] {
        &self.y
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn label_code(&self) -> LabelCode {
        LabelCode::new(self.y.clone(), self.k)
    }

    /// Instances per class, indexed by class − 1.
    pub fn class_histogram(&self) -> Vec<usize> {
        let mut hist = vec![0usize; self.k];
        for &c in &self.y {
            hist[c as usize - 1] += 1;
        }
        hist
    }

    /// Classes in `1..=K` with no instance present.
    pub fn missing_classes(&self) -> Vec<u32> {
        self.class_histogram()
            .iter()
            .enumerate()
            .filter(|(_, &count)| count == 0)
            .map(|(i, _)| i as u32 + 1)
            .collect()
    }

    /// Labeled subsample of `m` rows drawn without replacement; deterministic
    /// under `seed`. Used to run scaled-down experiments.
    pub fn subsample_labeled(&self, m: usize, seed: u64) -> Result<Dataset> {
        let rows = subsample_indices(self.n(), m, seed)?;
        let y = rows.iter().map(|&r| self.y[r as usize]).collect();
        Dataset::new(
            self.x.select_rows(&rows),
            y,
            self.k,
            self.geometry,
            self.label_names.clone(),
        )
    }
}

/// ±1 one-hot label code: row i has +1 at column `y_i − 1` and −1 elsewhere.
#[derive(Debug, Clone)]
pub struct LabelCode {
    labels: Vec<u32>,
    k: usize,
}

impl LabelCode {
    pub fn new(labels: Vec<u32>, k: usize) -> Self {
        LabelCode { labels, k }
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }
}

/// Access to a ±1 label matrix without materializing it. One-hot codes and
/// dense multi-label codes (autoassociative targets) both implement this.
pub trait LabelSigns: Sync {
    fn n(&self) -> usize;
    fn k(&self) -> usize;
    /// `y_{i,ℓ}` with 0-based label index; always +1 or −1.
    fn sign(&self, row: usize, label: usize) -> f64;
}

impl LabelSigns for LabelCode {
    #[inline]
    fn n(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    fn k(&self) -> usize {
        self.k
    }

    #[inline]
    fn sign(&self, row: usize, label: usize) -> f64 {
        if self.labels[row] as usize == label + 1 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Dense ±1 label matrix, stored as signs.
#[derive(Debug, Clone)]
pub struct DenseSigns {
    signs: Vec<i8>,
    n: usize,
    k: usize,
}

impl DenseSigns {
    pub fn new(signs: Vec<i8>, n: usize, k: usize) -> Result<Self> {
        if signs.len() != n * k {
            return Err(Error::DimensionMismatch {
                what: "sign matrix",
                expected: n * k,
                found: signs.len(),
            });
        }
        Ok(DenseSigns { signs, n, k })
    }
}

impl LabelSigns for DenseSigns {
    #[inline]
    fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn k(&self) -> usize {
        self.k
    }

    #[inline]
    fn sign(&self, row: usize, label: usize) -> f64 {
        self.signs[row * self.k + label] as f64
    }
}

/// Per-feature standardization fitted on training data: `(x − μ)/σ`, with
/// zero-variance features shifted by −μ only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Normalizer {
    pub fn fit(x: &Matrix) -> Normalizer {
        let n = x.rows();
        let d = x.cols();
        let mut mean = vec![0.0; d];
        let mut std = vec![0.0; d];
        for j in 0..d {
            let mut sum = 0.0;
            for i in 0..n {
                sum += x.get(i, j);
            }
            let mu = sum / n as f64;
            mean[j] = mu;
            if n > 1 {
                let mut ss = 0.0;
                for i in 0..n {
                    let dv = x.get(i, j) - mu;
                    ss += dv * dv;
                }
                std[j] = (ss / (n - 1) as f64).sqrt();
            }
        }
        Normalizer { mean, std }
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                what: "normalizer",
                expected: self.mean.len(),
                found: x.cols(),
            });
        }
        let mut out = x.clone();
        for i in 0..out.rows() {
            let row = out.row_mut(i);
            for (j, cell) in row.iter_mut().enumerate() {
                let centered = *cell - self.mean[j];
                *cell = if self.std[j] > 0.0 {
                    centered / self.std[j]
                } else {
                    centered
                };
            }
        }
        Ok(out)
    }
}

/// Seeded shuffle split into (train, validation) parts of sizes
/// (⌊n·fraction⌋, rest). Classes missing from the training part are reported
/// with `log::warn!` and returned for the caller to surface.
pub fn split_train_valid(
    ds: &Dataset,
    fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset, Vec<u32>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "split fraction {fraction} outside (0, 1)"
        )));
    }
    let n = ds.n();
    let mut indices: Vec<u32> = (0..n as u32).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let n_train = (n as f64 * fraction).floor() as usize;
    let (train_idx, valid_idx) = indices.split_at(n_train);

    let part = |idx: &[u32]| -> Result<Dataset> {
        let y = idx.iter().map(|&r| ds.y[r as usize]).collect();
        Dataset::new(
            ds.x.select_rows(idx),
            y,
            ds.k,
            ds.geometry,
            ds.label_names.clone(),
        )
    };
    let train = part(train_idx)?;
    let valid = part(valid_idx)?;
    let missing = train.missing_classes();
    if !missing.is_empty() {
        log::warn!(
            "classes {:?} absent from the training part of the split",
            missing
        );
    }
    Ok((train, valid, missing))
}

fn subsample_indices(n: usize, m: usize, seed: u64) -> Result<Vec<u32>> {
    if m > n {
        return Err(Error::InvalidConfig(format!(
            "subsample size {m} exceeds instance count {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(rand::seq::index::sample(&mut rng, n, m)
        .into_iter()
        .map(|i| i as u32)
        .collect())
}

/// `m` instance rows drawn without replacement, deterministic under `seed`.
pub fn subsample_instances(ds: &Dataset, m: usize, seed: u64) -> Result<Matrix> {
    Ok(ds.x.select_rows(&subsample_indices(ds.n(), m, seed)?))
}

#[derive(Serialize, Deserialize)]
struct DatasetFile {
    format: String,
    version: u32,
    n: usize,
    d: usize,
    k: usize,
    geometry: Option<Geometry>,
    label_names: Vec<String>,
    labels: Vec<u32>,
    x: Vec<Vec<f64>>,
}

const DATASET_FORMAT: &str = "corrboost-dataset";
const DATASET_VERSION: u32 = 1;

/// Writes the JSON interchange format. Reloading reproduces `X` and `y`
/// bit-exactly (floats are printed with shortest round-trip precision).
pub fn save_dataset_json(ds: &Dataset, path: &Path) -> Result<()> {
    let file = DatasetFile {
        format: DATASET_FORMAT.to_string(),
        version: DATASET_VERSION,
        n: ds.n(),
        d: ds.d(),
        k: ds.k(),
        geometry: ds.geometry,
        label_names: ds.label_names.clone(),
        labels: ds.y.clone(),
        x: (0..ds.n()).map(|i| ds.x.row(i).to_vec()).collect(),
    };
    let w = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    serde_json::to_writer(w, &file).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })
}

pub fn load_dataset_json(path: &Path) -> Result<Dataset> {
    let r = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
    let file: DatasetFile = serde_json::from_reader(r).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    if file.format != DATASET_FORMAT || file.version != DATASET_VERSION {
        return Err(Error::Schema(format!(
            "expected {DATASET_FORMAT} v{DATASET_VERSION}, found {} v{}",
            file.format, file.version
        )));
    }
    let x = Matrix::from_rows(&file.x)?;
    if x.rows() != file.n || x.cols() != file.d {
        return Err(Error::Schema(format!(
            "declared shape {}x{} does not match data {}x{}",
            file.n,
            file.d,
            x.rows(),
            x.cols()
        )));
    }
    Dataset::new(x, file.labels, file.k, file.geometry, file.label_names)
}
