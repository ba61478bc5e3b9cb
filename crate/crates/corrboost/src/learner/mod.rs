//! Vector-valued weak learners: multi-class decision stumps h(x) = v·φ(x)
//! and Hamming trees grown from them, both optimized against the weighted
//! multi-class edge γ = Σᵢ Σ_ℓ w_{i,ℓ} h_ℓ(xᵢ) y_{i,ℓ}.
//!
//! The stump search scans threshold candidates at midpoints between
//! consecutive distinct sorted values, plus a −∞ sentinel meaning "always
//! +1" (the best constant classifier). The achieved edge of the winning
//! stump is recomputed directly over the node rows in index order, so the
//! reported value is independent of the incremental scan arithmetic.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::LabelSigns;
use crate::error::{Error, Result};
use crate::space::{FeatureKey, FeatureSpace, RowSet};

mod tree;

pub use tree::{learn_tree, HammingTree, TreeFit, TreeNode};

/// w_{i,ℓ}·y_{i,ℓ} products, the only view of weights and labels the split
/// search needs.
#[derive(Debug, Clone)]
pub struct WyMatrix {
    data: Vec<f64>,
    n: usize,
    k: usize,
}

impl WyMatrix {
    pub fn new(weights: &[f64], labels: &impl LabelSigns) -> WyMatrix {
        let (n, k) = (labels.n(), labels.k());
        debug_assert_eq!(weights.len(), n * k);
        let mut data = vec![0.0; n * k];
        data.par_chunks_mut(k).enumerate().for_each(|(i, row)| {
            for (l, cell) in row.iter_mut().enumerate() {
                *cell = weights[i * k + l] * labels.sign(i, l);
            }
        });
        WyMatrix { data, n, k }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Per-label sums Σ_{i∈rows} w_{i,ℓ} y_{i,ℓ}, accumulated in row order.
    pub fn base_sums(&self, rows: &RowSet) -> Vec<f64> {
        let mut base = vec![0.0; self.k];
        for &row in rows.rows() {
            for (b, v) in base.iter_mut().zip(self.row(row as usize)) {
                *b += v;
            }
        }
        base
    }
}

/// Decision stump: φ(x) = +1 iff the feature value is ≥ threshold, and the
/// vector output is v·φ(x) ∈ {±1}^K.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: FeatureKey,
    #[serde(with = "threshold_fmt")]
    pub threshold: f64,
    pub votes: Vec<i8>,
}

impl Stump {
    #[inline]
    pub fn phi_of_value(&self, value: f64) -> f64 {
        if value >= self.threshold {
            1.0
        } else {
            -1.0
        }
    }

    pub fn phi(&self, space: &dyn FeatureSpace, row: usize) -> f64 {
        self.phi_of_value(space.value(&self.feature, row))
    }

    /// Writes v·φ into `out`.
    pub fn output_into(&self, phi: f64, out: &mut [f64]) {
        for (o, &v) in out.iter_mut().zip(&self.votes) {
            *o = v as f64 * phi;
        }
    }
}

/// JSON cannot carry ±∞; the sentinel thresholds are written as strings.
mod threshold_fmt {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            v.serialize(s)
        } else if *v == f64::NEG_INFINITY {
            "-inf".serialize(s)
        } else {
            "inf".serialize(s)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Str(s) => match s.as_str() {
                "-inf" => Ok(f64::NEG_INFINITY),
                "inf" => Ok(f64::INFINITY),
                other => Err(serde::de::Error::custom(format!(
                    "bad threshold string {other:?}"
                ))),
            },
        }
    }
}

/// A learned stump with its achieved edge Σ_ℓ |γ_ℓ| on the training rows.
#[derive(Debug, Clone)]
pub struct StumpFit {
    pub stump: Stump,
    pub edge: f64,
}

/// Best (feature, threshold) over the candidates by Σ_ℓ |γ_ℓ|, with
/// γ_ℓ = Σᵢ w_{i,ℓ} y_{i,ℓ} φ(xᵢ) over the given rows. Votes are
/// v_ℓ = sign(γ_ℓ) with sign(0) := +1. Ties in the objective keep the
/// earliest candidate and the earliest threshold.
pub fn learn_stump(
    space: &dyn FeatureSpace,
    wy: &WyMatrix,
    rows: &RowSet,
    candidates: &[FeatureKey],
) -> Result<StumpFit> {
    if candidates.is_empty() {
        return Err(Error::InvalidConfig("no candidate features".into()));
    }
    if rows.is_empty() {
        return Err(Error::InvalidConfig("no rows for the stump search".into()));
    }
    let base = wy.base_sums(rows);

    let scans: Vec<(f64, f64)> = candidates
        .par_iter()
        .map(|key| {
            let mut pairs = Vec::with_capacity(rows.len());
            space.sorted_column(key, rows, &mut pairs);
            scan_thresholds(&pairs, wy, &base)
        })
        .collect();

    let mut best = 0usize;
    for (idx, scan) in scans.iter().enumerate() {
        if scan.0 > scans[best].0 {
            best = idx;
        }
    }
    let (_, threshold) = scans[best];
    Ok(finalize_stump(
        space,
        wy,
        rows,
        candidates[best].clone(),
        threshold,
    ))
}

/// One pass over the value-sorted rows, flipping instances from the +1 to the
/// −1 side of φ. Candidate thresholds sit between distinct values; the −∞
/// sentinel (all +1) competes last, so a real split wins ties against the
/// constant classifier and ties among midpoints keep the smallest threshold.
fn scan_thresholds(pairs: &[(u32, f64)], wy: &WyMatrix, base: &[f64]) -> (f64, f64) {
    let k = wy.k();
    let sentinel_obj: f64 = base.iter().map(|g| g.abs()).sum();
    let mut gamma = base.to_vec();
    let mut best_obj = f64::NEG_INFINITY;
    let mut best_theta = f64::NEG_INFINITY;

    let mut i = 0;
    while i < pairs.len() {
        let value = pairs[i].1;
        while i < pairs.len() && pairs[i].1 == value {
            let row = pairs[i].0 as usize;
            let wyr = wy.row(row);
            for l in 0..k {
                gamma[l] -= 2.0 * wyr[l];
            }
            i += 1;
        }
        if i < pairs.len() {
            let next = pairs[i].1;
            let mut theta = 0.5 * (value + next);
            // Keep the partition: θ must fall strictly above `value`.
            if theta <= value {
                theta = next;
            }
            let obj: f64 = gamma.iter().map(|g| g.abs()).sum();
            if obj > best_obj {
                best_obj = obj;
                best_theta = theta;
            }
        }
    }
    if sentinel_obj > best_obj {
        (sentinel_obj, f64::NEG_INFINITY)
    } else {
        (best_obj, best_theta)
    }
}

/// Recomputes γ directly over the rows (in index order) for the chosen
/// feature and threshold, and derives votes and the reported edge from it.
fn finalize_stump(
    space: &dyn FeatureSpace,
    wy: &WyMatrix,
    rows: &RowSet,
    feature: FeatureKey,
    threshold: f64,
) -> StumpFit {
    let k = wy.k();
    let mut gamma = vec![0.0; k];
    for &row in rows.rows() {
        let phi = if space.value(&feature, row as usize) >= threshold {
            1.0
        } else {
            -1.0
        };
        let wyr = wy.row(row as usize);
        for l in 0..k {
            gamma[l] += wyr[l] * phi;
        }
    }
    let edge: f64 = gamma.iter().map(|g| g.abs()).sum();
    let votes: Vec<i8> = gamma
        .iter()
        .map(|&g| if g >= 0.0 { 1 } else { -1 })
        .collect();
    StumpFit {
        stump: Stump {
            feature,
            threshold,
            votes,
        },
        edge,
    }
}
