//! Autoassociative feature selection: run the AdaBoost.MH loop where the
//! "labels" are the binarized input features themselves (per-feature median
//! split on the subsample) and every stump reads a single input feature.
//! The distinct stump input features, in first-pick order, form the
//! selection.

use rayon::prelude::*;

use crate::boost::{alpha_of, edge_of, update_weights, SignMatrix, WeightMatrix};
use crate::data::{DenseSigns, Matrix};
use crate::error::{Error, Result};
use crate::learner::{learn_stump, WyMatrix};
use crate::space::{ColumnSpace, FeatureKey, FeatureSpace, RowSet};

/// Median of a column: middle order statistic for odd lengths, mean of the
/// two central values for even.
fn median(column: &mut [f64]) -> f64 {
    column.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = column.len();
    if n % 2 == 1 {
        column[n / 2]
    } else {
        0.5 * (column[n / 2 - 1] + column[n / 2])
    }
}

/// Pseudo-label matrix: +1 where the value exceeds its column median.
fn binarize(x_sub: &Matrix) -> Result<DenseSigns> {
    let (n, d) = (x_sub.rows(), x_sub.cols());
    let medians: Vec<f64> = (0..d)
        .into_par_iter()
        .map(|j| {
            let mut col = x_sub.column(j);
            median(&mut col)
        })
        .collect();
    let mut any_varying = false;
    'outer: for j in 0..d {
        let first = x_sub.get(0, j);
        for i in 1..n {
            if x_sub.get(i, j) != first {
                any_varying = true;
                break 'outer;
            }
        }
    }
    if !any_varying {
        return Err(Error::InvalidConfig(
            "autoassociative selection on all-constant input".into(),
        ));
    }
    let mut signs = vec![0i8; n * d];
    for i in 0..n {
        for j in 0..d {
            signs[i * d + j] = if x_sub.get(i, j) > medians[j] { 1 } else { -1 };
        }
    }
    DenseSigns::new(signs, n, d)
}

/// Ordered list of distinct input features picked by `t_aa` iterations of
/// single-feature stump boosting on the instance subsample.
pub fn autoassociative_select(x_sub: &Matrix, t_aa: usize) -> Result<Vec<u32>> {
    if t_aa < 1 {
        return Err(Error::InvalidConfig("need at least 1 iteration".into()));
    }
    if x_sub.rows() < 2 {
        return Err(Error::InvalidConfig(
            "autoassociative selection needs at least 2 instances".into(),
        ));
    }
    let labels = binarize(x_sub)?;
    let (n, d) = (x_sub.rows(), x_sub.cols());

    let space = ColumnSpace::new("raw", x_sub.clone());
    let candidates: Vec<FeatureKey> = (0..d as u32).map(FeatureKey::Column).collect();
    let rows = RowSet::all(n);
    // Pseudo-labels are not one-hot, so weights start uniform.
    let mut weights = WeightMatrix::uniform(n, d);

    let mut picked: Vec<u32> = Vec::new();
    for t in 1..=t_aa {
        let wy = WyMatrix::new(weights.as_slice(), &labels);
        let fit = learn_stump(&space, &wy, &rows, &candidates)?;
        let h = stump_signs(&fit.stump, &space, n, d);
        let gamma = edge_of(&h, &weights, &labels)?;
        if gamma <= 0.0 {
            log::warn!("autoassociative selection stopped at iteration {t}: γ = {gamma}");
            break;
        }
        let alpha = alpha_of(gamma);
        update_weights(&mut weights, alpha, &h, &labels);
        if let FeatureKey::Column(j) = fit.stump.feature {
            if !picked.contains(&j) {
                picked.push(j);
            }
        }
    }
    Ok(picked)
}

fn stump_signs(
    stump: &crate::learner::Stump,
    space: &dyn FeatureSpace,
    n: usize,
    k: usize,
) -> SignMatrix {
    let mut data = vec![0i8; n * k];
    data.par_chunks_mut(k).enumerate().for_each(|(i, row)| {
        let phi = stump.phi(space, i);
        for (cell, &v) in row.iter_mut().zip(&stump.votes) {
            *cell = if phi > 0.0 { v } else { -v };
        }
    });
    SignMatrix::from_parts(data, n, k)
}
