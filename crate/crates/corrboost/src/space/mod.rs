//! Candidate-feature strategies for boosting.
//!
//! The booster is generic over where split candidates come from: raw input
//! columns, constructed neighborhood/edge columns, or lazily sampled Haar
//! filters. Each strategy implements [`FeatureSpace`] and is registered by
//! name in a [`SpaceRegistry`]; the CLI selects one at runtime via `--mode`.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::data::{Geometry, Matrix};
use crate::error::{Error, Result};
use crate::features::FeatureTransform;
use crate::haar::HaarFilter;

mod columns;
mod haar_space;

pub use columns::ColumnSpace;
pub use haar_space::HaarSpace;

/// Stable identity of a feature inside a space: a column index for
/// materialized spaces, a filter descriptor for the Haar space. This is what
/// models serialize.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKey {
    Column(u32),
    Haar(HaarFilter),
}

/// Instance subset of a node: a sorted row list plus a membership mask for
/// filtering presorted column orders.
#[derive(Debug, Clone)]
pub struct RowSet {
    rows: Vec<u32>,
    mask: Vec<bool>,
}

impl RowSet {
    pub fn all(n: usize) -> RowSet {
        RowSet {
            rows: (0..n as u32).collect(),
            mask: vec![true; n],
        }
    }

    /// `rows` must be ascending.
    pub fn from_rows(rows: Vec<u32>, n: usize) -> RowSet {
        debug_assert!(rows.windows(2).all(|w| w[0] < w[1]));
        let mut mask = vec![false; n];
        for &r in &rows {
            mask[r as usize] = true;
        }
        RowSet { rows, mask }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    #[inline]
    pub fn contains(&self, row: u32) -> bool {
        self.mask[row as usize]
    }
}

/// A source of candidate features over a fixed set of instances.
///
/// `sorted_column` must order by (value, row) ascending so threshold scans
/// and tie handling are deterministic regardless of strategy.
pub trait FeatureSpace: Send + Sync {
    /// Registry name of the strategy that built this space.
    fn mode(&self) -> &'static str;

    fn n_rows(&self) -> usize;

    /// Total number of distinct features, when finite and known.
    fn pool_size(&self) -> Option<u64>;

    /// Draws `count` candidate features for one split.
    fn sample(&self, rng: &mut dyn RngCore, count: usize) -> Vec<FeatureKey>;

    /// Feature value for one instance.
    fn value(&self, key: &FeatureKey, row: usize) -> f64;

    /// Fills `out` with (row, value) for the rows in `rows`, ascending by
    /// (value, row).
    fn sorted_column(&self, key: &FeatureKey, rows: &RowSet, out: &mut Vec<(u32, f64)>);
}

/// Everything needed to build a space over a set of instances.
pub struct SpaceInput<'a> {
    pub matrix: &'a Matrix,
    pub geometry: Option<&'a Geometry>,
    pub transform: Option<&'a FeatureTransform>,
}

pub type SpaceBuilder = fn(&SpaceInput) -> Result<Box<dyn FeatureSpace>>;

/// Name → builder table for the candidate-feature strategies.
pub struct SpaceRegistry {
    entries: Vec<(&'static str, SpaceBuilder)>,
}

impl SpaceRegistry {
    /// Registry with the three built-in strategies: `raw`, `constructed`,
    /// `haar`.
    pub fn builtin() -> SpaceRegistry {
        let mut reg = SpaceRegistry {
            entries: Vec::new(),
        };
        reg.register("raw", build_raw);
        reg.register("constructed", build_constructed);
        reg.register("haar", build_haar);
        reg
    }

    pub fn register(&mut self, name: &'static str, builder: SpaceBuilder) {
        if let Some(entry) = self.entries.iter_mut().find(|(n, _)| *n == name) {
            entry.1 = builder;
        } else {
            self.entries.push((name, builder));
        }
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }

    pub fn build(&self, mode: &str, input: &SpaceInput) -> Result<Box<dyn FeatureSpace>> {
        match self.entries.iter().find(|(n, _)| *n == mode) {
            Some((_, builder)) => builder(input),
            None => Err(Error::InvalidConfig(format!(
                "unknown feature-space mode {mode:?}; registered: {}",
                self.names().join(", ")
            ))),
        }
    }
}

fn build_raw(input: &SpaceInput) -> Result<Box<dyn FeatureSpace>> {
    Ok(Box::new(ColumnSpace::new("raw", input.matrix.clone())))
}

fn build_constructed(input: &SpaceInput) -> Result<Box<dyn FeatureSpace>> {
    let transform = input.transform.ok_or_else(|| {
        Error::InvalidConfig("constructed mode requires a fitted feature transform".into())
    })?;
    let applied = transform.apply(input.matrix)?;
    Ok(Box::new(ColumnSpace::new("constructed", applied)))
}

fn build_haar(input: &SpaceInput) -> Result<Box<dyn FeatureSpace>> {
    let geometry = input
        .geometry
        .ok_or_else(|| Error::InvalidConfig("haar mode requires image geometry".into()))?;
    Ok(Box::new(HaarSpace::new(input.matrix, geometry)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lists_and_rejects() {
        let reg = SpaceRegistry::builtin();
        assert_eq!(reg.names(), vec!["raw", "constructed", "haar"]);
        let m = Matrix::zeros(2, 2);
        let input = SpaceInput {
            matrix: &m,
            geometry: None,
            transform: None,
        };
        assert!(reg.build("nope", &input).is_err());
        assert!(reg.build("constructed", &input).is_err()); // no transform
        assert!(reg.build("haar", &input).is_err()); // no geometry
        assert_eq!(reg.build("raw", &input).unwrap().mode(), "raw");
    }

    #[test]
    fn rowset_membership() {
        let rs = RowSet::from_rows(vec![1, 3], 5);
        assert!(rs.contains(1) && rs.contains(3));
        assert!(!rs.contains(0) && !rs.contains(2) && !rs.contains(4));
        assert_eq!(RowSet::all(3).rows(), &[0, 1, 2]);
    }
}
