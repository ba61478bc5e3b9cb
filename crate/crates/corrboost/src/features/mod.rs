//! Unsupervised construction of neighborhood and edge features from pairwise
//! feature correlations.
//!
//! The fitted pipeline records everything needed to replay deterministically
//! on new data: the selected raw features, the member sets of every
//! neighborhood, the edge pair list and the normalization parameters.
//!
//! Construction steps over the correlation subsample:
//! 1. neighborhoods J(x^j) = { j′ : ρ(x^j, x^{j′}) ≥ ρ_N }, one per selected
//!    feature per threshold, duplicates removed (first occurrence kept);
//! 2. neighborhood features z^j = mean of the member features;
//! 3. edges between neighborhood features with ρ(z^{j₁}, z^{j₂}) ≥ ρ_E,
//!    stored with the smaller index first;
//! 4. edge features s^j = z^{ℓ₁} − z^{ℓ₂};
//! 5. output = neighborhood features then edge features.
//!
//! Membership thresholds act on signed correlations; negatively correlated
//! features never join. Self-membership always holds since ρ(x^j, x^j) = 1.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::correlation::{correlation_matrix, CorrelationMatrix};
use crate::data::{subsample_instances, Dataset, Geometry, Matrix, Normalizer};
use crate::error::{Error, Result};

mod io;
mod masks;

pub use io::{load_transform, save_transform};
pub use masks::{
    edge_mask_images, neighborhood_mask_images, write_edge_members, write_neighborhood_members,
    MaskImage,
};

/// Neighborhoods over the selected raw features. Member indices are positions
/// into `selected`; every set contains at least its own feature and all
/// stored sets are unique.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodSet {
    /// Raw-feature indices the transform operates on, in selection order.
    pub selected: Vec<u32>,
    /// Per-neighborhood member positions (into `selected`), ascending.
    pub members: Vec<Vec<u32>>,
    /// Thresholds used, descending (tightest neighborhood first).
    pub thresholds: Vec<f64>,
}

/// Edges between neighborhood features: pairs of neighborhood indices with
/// the smaller index first, no duplicates, no self-pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSet {
    pub pairs: Vec<(u32, u32)>,
    pub threshold: f64,
}

/// Configuration for fitting a [`FeatureTransform`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransformConfig {
    /// Correlation subsample size m.
    pub subsample: usize,
    pub seed: u64,
    /// ρ_N threshold set, each in (0, 1).
    pub neighborhood_thresholds: Vec<f64>,
    /// ρ_E, in (0, 1].
    pub edge_threshold: f64,
    /// Standardize selected features before construction (recommended for
    /// heterogeneous non-image data).
    pub normalize: bool,
    /// Pre-selected raw feature indices (for example from autoassociative
    /// selection); all features when absent.
    pub selected: Option<Vec<u32>>,
}

/// Fitted pipeline applicable to any matrix with the original raw width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTransform {
    pub raw_dim: usize,
    pub geometry: Option<Geometry>,
    pub normalizer: Option<Normalizer>,
    pub neighborhoods: NeighborhoodSet,
    pub edges: EdgeSet,
}

/// Builds { j′ : ρ(j, j′) ≥ ρ_N } for every feature and threshold, iterating
/// features in order and thresholds descending, deduplicating identical sets
/// (first occurrence kept).
pub fn build_neighborhoods(c: &CorrelationMatrix, thresholds: &[f64]) -> Result<Vec<Vec<u32>>> {
    if thresholds.is_empty() {
        return Err(Error::InvalidConfig(
            "empty neighborhood threshold set".into(),
        ));
    }
    if thresholds.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
        return Err(Error::InvalidConfig(format!(
            "neighborhood thresholds must lie in (0, 1): {thresholds:?}"
        )));
    }
    let mut order: Vec<f64> = thresholds.to_vec();
    order.sort_by(|a, b| b.partial_cmp(a).unwrap());
    order.dedup();

    let p = c.p();
    let mut sets: Vec<Vec<u32>> = Vec::new();
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    for j in 0..p {
        for &threshold in &order {
            let members: Vec<u32> = (0..p)
                .filter(|&k| c.get(j, k) >= threshold)
                .map(|k| k as u32)
                .collect();
            debug_assert!(members.contains(&(j as u32)));
            if seen.insert(members.clone()) {
                sets.push(members);
            }
        }
    }
    Ok(sets)
}

/// z_i^j = (1/|J_j|) Σ_{j′∈J_j} x_i^{j′}; columns of `x` are the selected
/// features in selection order.
pub fn neighborhood_features(x: &Matrix, sets: &[Vec<u32>]) -> Result<Matrix> {
    for set in sets {
        if let Some(&bad) = set.iter().find(|&&m| m as usize >= x.cols()) {
            return Err(Error::DimensionMismatch {
                what: "neighborhood member",
                expected: x.cols(),
                found: bad as usize,
            });
        }
    }
    let mut z = Matrix::zeros(x.rows(), sets.len());
    for i in 0..x.rows() {
        let row = x.row(i);
        let out = z.row_mut(i);
        for (s, set) in sets.iter().enumerate() {
            let sum: f64 = set.iter().map(|&m| row[m as usize]).sum();
            out[s] = sum / set.len() as f64;
        }
    }
    Ok(z)
}

/// All pairs j₁ < j₂ with ρ(z^{j₁}, z^{j₂}) ≥ ρ_E.
pub fn build_edges(c_z: &CorrelationMatrix, edge_threshold: f64) -> Result<Vec<(u32, u32)>> {
    if !(edge_threshold > 0.0 && edge_threshold <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "edge threshold must lie in (0, 1]: {edge_threshold}"
        )));
    }
    let q = c_z.p();
    let mut pairs = Vec::new();
    for j in 0..q {
        for k in j + 1..q {
            if c_z.get(j, k) >= edge_threshold {
                pairs.push((j as u32, k as u32));
            }
        }
    }
    Ok(pairs)
}

/// s_i^j = z_i^{ℓ₁} − z_i^{ℓ₂}.
pub fn edge_features(z: &Matrix, pairs: &[(u32, u32)]) -> Result<Matrix> {
    for &(a, b) in pairs {
        if a as usize >= z.cols() || b as usize >= z.cols() {
            return Err(Error::DimensionMismatch {
                what: "edge pair",
                expected: z.cols(),
                found: a.max(b) as usize,
            });
        }
    }
    let mut s = Matrix::zeros(z.rows(), pairs.len());
    for i in 0..z.rows() {
        let row = z.row(i);
        let out = s.row_mut(i);
        for (e, &(a, b)) in pairs.iter().enumerate() {
            out[e] = row[a as usize] - row[b as usize];
        }
    }
    Ok(s)
}

/// A fit plus the two correlation matrices it was built from, for
/// inspection exports.
pub struct FitReport {
    pub transform: FeatureTransform,
    pub input_correlation: CorrelationMatrix,
    pub neighborhood_correlation: CorrelationMatrix,
}

impl FeatureTransform {
    /// Runs the full construction on the dataset's correlation subsample:
    /// subsample → optional normalize → correlations → neighborhoods →
    /// neighborhood features → correlations of z → edges. The construction
    /// never looks at labels.
    pub fn fit(ds: &Dataset, cfg: &TransformConfig) -> Result<FeatureTransform> {
        Ok(Self::fit_report(ds, cfg)?.transform)
    }

    pub fn fit_report(ds: &Dataset, cfg: &TransformConfig) -> Result<FitReport> {
        let x_sub = subsample_instances(ds, cfg.subsample, cfg.seed)?;
        let selected: Vec<u32> = match &cfg.selected {
            Some(sel) => {
                if sel.is_empty() {
                    return Err(Error::InvalidConfig("empty feature selection".into()));
                }
                let mut seen = HashSet::new();
                for &j in sel {
                    if j as usize >= ds.d() {
                        return Err(Error::DimensionMismatch {
                            what: "selected feature",
                            expected: ds.d(),
                            found: j as usize,
                        });
                    }
                    if !seen.insert(j) {
                        return Err(Error::InvalidConfig(format!("feature {j} selected twice")));
                    }
                }
                sel.clone()
            }
            None => (0..ds.d() as u32).collect(),
        };

        let x_sel = x_sub.select_columns(&selected);
        let (normalizer, x_work) = if cfg.normalize {
            let norm = Normalizer::fit(&x_sel);
            let applied = norm.apply(&x_sel)?;
            (Some(norm), applied)
        } else {
            (None, x_sel)
        };

        let c = correlation_matrix(&x_work)?;
        let members = build_neighborhoods(&c, &cfg.neighborhood_thresholds)?;
        let z_sub = neighborhood_features(&x_work, &members)?;
        let c_z = correlation_matrix(&z_sub)?;
        let pairs = build_edges(&c_z, cfg.edge_threshold)?;

        let mut thresholds = cfg.neighborhood_thresholds.clone();
        thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
        thresholds.dedup();

        Ok(FitReport {
            transform: FeatureTransform {
                raw_dim: ds.d(),
                geometry: ds.geometry().copied(),
                normalizer,
                neighborhoods: NeighborhoodSet {
                    selected,
                    members,
                    thresholds,
                },
                edges: EdgeSet {
                    pairs,
                    threshold: cfg.edge_threshold,
                },
            },
            input_correlation: c,
            neighborhood_correlation: c_z,
        })
    }

    pub fn neighborhood_count(&self) -> usize {
        self.neighborhoods.members.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.pairs.len()
    }

    /// Output width: unique-neighborhood count + edge count, always.
    pub fn output_dim(&self) -> usize {
        self.neighborhood_count() + self.edge_count()
    }

    /// Applies the fitted pipeline to a raw matrix; columns come out as
    /// (z¹…z^q, s¹…s^L).
    pub fn apply(&self, x_raw: &Matrix) -> Result<Matrix> {
        if x_raw.cols() != self.raw_dim {
            return Err(Error::DimensionMismatch {
                what: "transform input",
                expected: self.raw_dim,
                found: x_raw.cols(),
            });
        }
        let x_sel = x_raw.select_columns(&self.neighborhoods.selected);
        let x_work = match &self.normalizer {
            Some(norm) => norm.apply(&x_sel)?,
            None => x_sel,
        };
        let z = neighborhood_features(&x_work, &self.neighborhoods.members)?;
        let s = edge_features(&z, &self.edges.pairs)?;
        z.hconcat(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn identity_correlation(p: usize) -> CorrelationMatrix {
        // Uncorrelated columns: build from an orthogonal-ish design large
        // enough that off-diagonals are tiny, then force them to exactly 0
        // via a diagonal matrix construction trick: use one-hot columns.
        let mut rows = Vec::new();
        for i in 0..2 * p {
            let mut r = vec![0.0; p];
            r[i % p] = if i < p { 1.0 } else { -1.0 };
            rows.push(r);
        }
        correlation_matrix(&Matrix::from_rows(&rows).unwrap()).unwrap()
    }

    #[test]
    fn uncorrelated_features_give_singletons() {
        let c = identity_correlation(4);
        for j in 0..4 {
            for k in 0..4 {
                if j != k {
                    assert!(c.get(j, k).abs() < 0.5);
                }
            }
        }
        let sets = build_neighborhoods(&c, &[0.5]).unwrap();
        assert_eq!(sets.len(), 4);
        for (j, set) in sets.iter().enumerate() {
            assert_eq!(set, &vec![j as u32]);
        }
    }

    #[test]
    fn perfectly_correlated_pair_deduplicates() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|_| {
                let v: f64 = rng.random();
                vec![v, v]
            })
            .collect();
        let c = correlation_matrix(&Matrix::from_rows(&rows).unwrap()).unwrap();
        let sets = build_neighborhoods(&c, &[0.5]).unwrap();
        assert_eq!(sets, vec![vec![0, 1]]);
    }

    #[test]
    fn thresholds_must_be_in_unit_interval() {
        let c = identity_correlation(2);
        assert!(build_neighborhoods(&c, &[]).is_err());
        assert!(build_neighborhoods(&c, &[0.0]).is_err());
        assert!(build_neighborhoods(&c, &[1.0]).is_err());
    }

    #[test]
    fn neighborhood_feature_formula() {
        // Singletons reproduce the input; {0, 1} averages.
        let x = Matrix::from_rows(&[vec![2.0, 4.0, 10.0]]).unwrap();
        let z = neighborhood_features(&x, &[vec![0], vec![1], vec![2]]).unwrap();
        assert_eq!(z.row(0), x.row(0));
        let z = neighborhood_features(&x, &[vec![0, 1]]).unwrap();
        assert_eq!(z.get(0, 0), 3.0);
    }

    #[test]
    fn neighborhood_features_match_direct_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rows: Vec<Vec<f64>> = (0..10)
            .map(|_| (0..5).map(|_| rng.random::<f64>()).collect())
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let sets: Vec<Vec<u32>> = (0..7)
            .map(|_| {
                let size = rng.random_range(1..=5);
                let mut s: Vec<u32> = rand::seq::index::sample(&mut rng, 5, size)
                    .iter()
                    .map(|v| v as u32)
                    .collect();
                s.sort_unstable();
                s
            })
            .collect();
        let z = neighborhood_features(&x, &sets).unwrap();
        for i in 0..10 {
            for (j, set) in sets.iter().enumerate() {
                let mut sum = 0.0;
                for &m in set {
                    sum += x.get(i, m as usize);
                }
                assert!((z.get(i, j) - sum / set.len() as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn edges_empty_when_uncorrelated_and_present_for_duplicates() {
        let c = identity_correlation(4);
        assert!(build_edges(&c, 0.7).unwrap().is_empty());

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|_| {
                let v: f64 = rng.random();
                vec![v, v, rng.random()]
            })
            .collect();
        let c = correlation_matrix(&Matrix::from_rows(&rows).unwrap()).unwrap();
        let pairs = build_edges(&c, 1.0).unwrap();
        assert!(
            pairs.contains(&(0, 1)),
            "duplicate columns must edge at ρ_E = 1"
        );
    }

    #[test]
    fn edges_match_brute_force_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        // Correlated block (0,1), independent 2, anti-correlated 3.
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|_| {
                let v: f64 = rng.random();
                let noise: f64 = rng.random::<f64>() * 0.1;
                vec![v, v + noise, rng.random(), -v]
            })
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let c = correlation_matrix(&x).unwrap();
        let rho_e = 0.5;
        let got = build_edges(&c, rho_e).unwrap();
        let mut expected = Vec::new();
        for j in 0..4u32 {
            for k in j + 1..4u32 {
                if c.get(j as usize, k as usize) >= rho_e {
                    expected.push((j, k));
                }
            }
        }
        assert_eq!(got, expected);
        for &(a, b) in &got {
            assert!(a < b);
        }
    }

    #[test]
    fn edge_feature_formula() {
        let z = Matrix::from_rows(&[vec![1.0, 0.0], vec![2.0, 5.0]]).unwrap();
        let s = edge_features(&z, &[(0, 1)]).unwrap();
        assert_eq!(s.column(0), vec![1.0, -3.0]);
        let same =
            edge_features(&Matrix::from_rows(&[vec![3.0, 3.0]]).unwrap(), &[(0, 1)]).unwrap();
        assert_eq!(same.get(0, 0), 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let zr: Vec<Vec<f64>> = (0..8)
            .map(|_| (0..4).map(|_| rng.random::<f64>()).collect())
            .collect();
        let zm = Matrix::from_rows(&zr).unwrap();
        let pairs = vec![(0u32, 3u32), (1, 2), (2, 3)];
        let s = edge_features(&zm, &pairs).unwrap();
        for i in 0..8 {
            for (e, &(a, b)) in pairs.iter().enumerate() {
                let direct = zm.get(i, a as usize) - zm.get(i, b as usize);
                assert!((s.get(i, e) - direct).abs() < 1e-15);
            }
        }
    }

    fn toy_dataset(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let v: f64 = rng.random();
            // Columns 0 and 1 strongly correlated, 2 independent.
            rows.push(vec![v, v + 0.05 * rng.random::<f64>(), rng.random()]);
            labels.push((i % 2) as u32 + 1);
        }
        Dataset::new(
            Matrix::from_rows(&rows).unwrap(),
            labels,
            2,
            None,
            vec!["1".into(), "2".into()],
        )
        .unwrap()
    }

    fn toy_config(n: usize) -> TransformConfig {
        TransformConfig {
            subsample: n,
            seed: 9,
            neighborhood_thresholds: vec![0.9],
            edge_threshold: 0.9,
            normalize: false,
            selected: None,
        }
    }

    #[test]
    fn identity_transform_when_nothing_correlates() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..3).map(|_| rng.random::<f64>()).collect())
            .collect();
        let ds = Dataset::new(
            Matrix::from_rows(&rows).unwrap(),
            vec![1; 40],
            1,
            None,
            vec!["1".into()],
        )
        .unwrap();
        let cfg = TransformConfig {
            subsample: 40,
            seed: 1,
            neighborhood_thresholds: vec![0.999999],
            edge_threshold: 0.999999,
            normalize: false,
            selected: None,
        };
        let t = FeatureTransform::fit(&ds, &cfg).unwrap();
        assert_eq!(t.neighborhood_count(), 3);
        assert_eq!(t.edge_count(), 0);
        let out = t.apply(ds.matrix()).unwrap();
        assert_eq!(out.as_slice(), ds.matrix().as_slice());
    }

    #[test]
    fn apply_is_deterministic_and_matches_hand_evaluation() {
        let ds = toy_dataset(60, 7);
        let t = FeatureTransform::fit(&ds, &toy_config(60)).unwrap();
        let a = t.apply(ds.matrix()).unwrap();
        let b = t.apply(ds.matrix()).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
        assert_eq!(a.cols(), t.output_dim());

        // Held-out rows against the formulas evaluated by hand.
        let held = Matrix::from_rows(&[vec![0.25, 0.5, 0.75]]).unwrap();
        let out = t.apply(&held).unwrap();
        let q = t.neighborhood_count();
        for (j, set) in t.neighborhoods.members.iter().enumerate() {
            let mut sum = 0.0;
            for &m in set {
                sum += held.get(0, t.neighborhoods.selected[m as usize] as usize);
            }
            assert!((out.get(0, j) - sum / set.len() as f64).abs() < 1e-12);
        }
        for (e, &(a1, b1)) in t.edges.pairs.iter().enumerate() {
            let direct = out.get(0, a1 as usize) - out.get(0, b1 as usize);
            assert!((out.get(0, q + e) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn transform_is_label_blind() {
        let ds = toy_dataset(50, 8);
        let mut reversed_labels: Vec<u32> = ds.labels().to_vec();
        reversed_labels.reverse();
        let permuted = Dataset::new(
            ds.matrix().clone(),
            reversed_labels,
            ds.k(),
            None,
            ds.label_names().to_vec(),
        )
        .unwrap();
        let t1 = FeatureTransform::fit(&ds, &toy_config(50)).unwrap();
        let t2 = FeatureTransform::fit(&permuted, &toy_config(50)).unwrap();
        assert_eq!(t1, t2);
    }

    #[test]
    fn dedup_is_idempotent_and_membership_monotone() {
        let ds = toy_dataset(80, 10);
        let x_sub = subsample_instances(&ds, 80, 3).unwrap();
        let c = correlation_matrix(&x_sub).unwrap();

        let s1 = build_neighborhoods(&c, &[0.4, 0.8]).unwrap();
        let s2 = build_neighborhoods(&c, &[0.8, 0.4]).unwrap();
        assert_eq!(s1, s2);

        // Lowering ρ_N never shrinks any per-feature set.
        for j in 0..c.p() {
            let tight: Vec<u32> = (0..c.p())
                .filter(|&k| c.get(j, k) >= 0.8)
                .map(|k| k as u32)
                .collect();
            let loose: Vec<u32> = (0..c.p())
                .filter(|&k| c.get(j, k) >= 0.4)
                .map(|k| k as u32)
                .collect();
            assert!(tight.iter().all(|m| loose.contains(m)));
            assert!(tight.contains(&(j as u32)), "self-membership");
        }

        // Raising ρ_E never grows the edge set.
        let z = neighborhood_features(&x_sub, &s1).unwrap();
        let cz = correlation_matrix(&z).unwrap();
        let low = build_edges(&cz, 0.5).unwrap();
        let high = build_edges(&cz, 0.8).unwrap();
        assert!(high.iter().all(|p| low.contains(p)));
    }

    #[test]
    fn selection_restricts_the_raw_columns() {
        let ds = toy_dataset(50, 12);
        let mut cfg = toy_config(50);
        cfg.selected = Some(vec![2, 0]);
        let t = FeatureTransform::fit(&ds, &cfg).unwrap();
        assert_eq!(t.neighborhoods.selected, vec![2, 0]);
        let out = t.apply(ds.matrix()).unwrap();
        assert_eq!(out.cols(), t.output_dim());

        cfg.selected = Some(vec![0, 0]);
        assert!(FeatureTransform::fit(&ds, &cfg).is_err());
        cfg.selected = Some(vec![7]);
        assert!(FeatureTransform::fit(&ds, &cfg).is_err());
    }

    #[test]
    fn apply_rejects_wrong_width() {
        let ds = toy_dataset(40, 13);
        let t = FeatureTransform::fit(&ds, &toy_config(40)).unwrap();
        let bad = Matrix::zeros(2, 5);
        assert!(t.apply(&bad).is_err());
    }
}
