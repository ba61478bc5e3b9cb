//! Materialized column space with presorted per-column row orders; backs both
//! the raw and the constructed modes.

use std::sync::OnceLock;

use rand::RngCore;

use crate::data::Matrix;
use crate::space::{FeatureKey, FeatureSpace, RowSet};

pub struct ColumnSpace {
    mode: &'static str,
    matrix: Matrix,
    /// Per column, lazily built: row indices ascending by (value, row).
    /// Sorting once makes node-level threshold scans a mask-filtered walk;
    /// prediction-only spaces never pay for it.
    sorted: Vec<OnceLock<Vec<u32>>>,
}

impl ColumnSpace {
    pub fn new(mode: &'static str, matrix: Matrix) -> ColumnSpace {
        let mut sorted = Vec::new();
        sorted.resize_with(matrix.cols(), OnceLock::new);
        ColumnSpace {
            mode,
            matrix,
            sorted,
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    fn order(&self, col: usize) -> &[u32] {
        self.sorted[col].get_or_init(|| {
            let mut order: Vec<u32> = (0..self.matrix.rows() as u32).collect();
            order.sort_unstable_by(|&a, &b| {
                let va = self.matrix.get(a as usize, col);
                let vb = self.matrix.get(b as usize, col);
                va.partial_cmp(&vb).unwrap().then(a.cmp(&b))
            });
            order
        })
    }

    fn column_of(&self, key: &FeatureKey) -> usize {
        match key {
            FeatureKey::Column(c) => *c as usize,
            FeatureKey::Haar(_) => panic!("column space cannot evaluate a haar filter key"),
        }
    }
}

impl FeatureSpace for ColumnSpace {
    fn mode(&self) -> &'static str {
        self.mode
    }

    fn n_rows(&self) -> usize {
        self.matrix.rows()
    }

    fn pool_size(&self) -> Option<u64> {
        Some(self.matrix.cols() as u64)
    }

    fn sample(&self, rng: &mut dyn RngCore, count: usize) -> Vec<FeatureKey> {
        let p = self.matrix.cols();
        if count >= p {
            (0..p as u32).map(FeatureKey::Column).collect()
        } else {
            rand::seq::index::sample(rng, p, count)
                .into_iter()
                .map(|j| FeatureKey::Column(j as u32))
                .collect()
        }
    }

    #[inline]
    fn value(&self, key: &FeatureKey, row: usize) -> f64 {
        self.matrix.get(row, self.column_of(key))
    }

    fn sorted_column(&self, key: &FeatureKey, rows: &RowSet, out: &mut Vec<(u32, f64)>) {
        let col = self.column_of(key);
        out.clear();
        out.reserve(rows.len());
        for &row in self.order(col) {
            if rows.contains(row) {
                out.push((row, self.matrix.get(row as usize, col)));
            }
        }
    }
}
