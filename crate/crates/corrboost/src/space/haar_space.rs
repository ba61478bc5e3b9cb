//! Lazily sampled Haar filter space. No column is ever materialized: each
//! split draws fresh filter descriptors and evaluates them on per-instance
//! integral images, which are computed once up front and shared read-only.

use rand::RngCore;
use rayon::prelude::*;

use crate::data::{Geometry, Matrix};
use crate::error::{Error, Result};
use crate::haar::{count_admissible, eval_filter, sample_filter, IntegralSet};
use crate::space::{FeatureKey, FeatureSpace, RowSet};

pub struct HaarSpace {
    geometry: Geometry,
    integrals: Vec<IntegralSet>,
}

impl HaarSpace {
    pub fn new(matrix: &Matrix, geometry: &Geometry) -> Result<HaarSpace> {
        if geometry.pixel_count() != matrix.cols() {
            return Err(Error::DimensionMismatch {
                what: "haar geometry",
                expected: matrix.cols(),
                found: geometry.pixel_count(),
            });
        }
        if count_admissible(geometry) == 0 {
            return Err(Error::InvalidConfig(format!(
                "geometry {}x{}x{} admits no Haar filter",
                geometry.height, geometry.width, geometry.channels
            )));
        }
        let integrals = (0..matrix.rows())
            .into_par_iter()
            .map(|i| IntegralSet::from_instance(matrix.row(i), geometry))
            .collect();
        Ok(HaarSpace {
            geometry: *geometry,
            integrals,
        })
    }

    fn filter_of<'k>(&self, key: &'k FeatureKey) -> &'k crate::haar::HaarFilter {
        match key {
            FeatureKey::Haar(f) => f,
            FeatureKey::Column(_) => panic!("haar space cannot evaluate a column key"),
        }
    }
}

impl FeatureSpace for HaarSpace {
    fn mode(&self) -> &'static str {
        "haar"
    }

    fn n_rows(&self) -> usize {
        self.integrals.len()
    }

    fn pool_size(&self) -> Option<u64> {
        Some(count_admissible(&self.geometry))
    }

    fn sample(&self, rng: &mut dyn RngCore, count: usize) -> Vec<FeatureKey> {
        (0..count)
            .map(|_| {
                // Admissibility was checked at construction.
                FeatureKey::Haar(sample_filter(rng, &self.geometry).expect("admissible geometry"))
            })
            .collect()
    }

    #[inline]
    fn value(&self, key: &FeatureKey, row: usize) -> f64 {
        eval_filter(&self.integrals[row], self.filter_of(key))
    }

    fn sorted_column(&self, key: &FeatureKey, rows: &RowSet, out: &mut Vec<(u32, f64)>) {
        let filter = self.filter_of(key);
        out.clear();
        out.reserve(rows.len());
        for &row in rows.rows() {
            out.push((row, eval_filter(&self.integrals[row as usize], filter)));
        }
        out.sort_unstable_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn values_match_direct_evaluation_and_order_is_sorted() {
        let geometry = Geometry {
            height: 4,
            width: 4,
            channels: 1,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut rows = Vec::new();
        for _ in 0..6 {
            rows.push(
                (0..16)
                    .map(|_| rand::Rng::random::<f64>(&mut rng))
                    .collect(),
            );
        }
        let m = Matrix::from_rows(&rows).unwrap();
        let space = HaarSpace::new(&m, &geometry).unwrap();
        let keys = space.sample(&mut rng, 5);
        let mut out = Vec::new();
        for key in &keys {
            space.sorted_column(key, &RowSet::all(6), &mut out);
            assert_eq!(out.len(), 6);
            assert!(out.windows(2).all(|w| w[0].1 <= w[1].1));
            for &(row, v) in &out {
                assert_eq!(space.value(key, row as usize), v);
            }
        }
    }
}
