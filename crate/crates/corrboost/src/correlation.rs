//! Pearson correlation between feature columns, estimated on an instance
//! subsample. The resulting symmetric matrix drives neighborhood and edge
//! construction.
//!
//! Estimation is two-pass (means first, then centered moments); each of the
//! p(p−1)/2 pairs is computed exactly once so symmetry is exact by
//! construction. Pair computations are independent and run in parallel over
//! columns with no shared mutable state.

use std::io::Write;

use rayon::prelude::*;

use crate::data::Matrix;
use crate::error::{Error, Result};

/// Symmetric p×p Pearson correlation matrix with a validity mask for
/// non-constant columns. Entries touching a constant column are 0 by
/// convention; the diagonal is 1.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    rho: Vec<f64>,
    p: usize,
    valid: Vec<bool>,
}

impl CorrelationMatrix {
    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.rho[j * self.p + k]
    }

    pub fn is_valid(&self, j: usize) -> bool {
        self.valid[j]
    }

    /// Rows of the matrix as delimited text, one row per line.
    pub fn write_delimited(&self, w: &mut impl Write, delimiter: char) -> std::io::Result<()> {
        for j in 0..self.p {
            for k in 0..self.p {
                if k > 0 {
                    write!(w, "{delimiter}")?;
                }
                write!(w, "{}", self.get(j, k))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Sample Pearson correlation of two equal-length vectors; 0 when either
/// vector is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            what: "pearson vectors",
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::InvalidConfig(
            "pearson needs at least 2 observations".into(),
        ));
    }
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for i in 0..a.len() {
        let da = a[i] - mean_a;
        let db = b[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Ok(0.0);
    }
    // Bitwise-identical vectors produce bitwise-equal moments; report
    // exactly ±1 instead of losing an ulp to sqrt rounding.
    if cov == var_a && var_a == var_b {
        return Ok(1.0);
    }
    if cov == -var_a && var_a == var_b {
        return Ok(-1.0);
    }
    Ok(cov / (var_a * var_b).sqrt())
}

/// Correlation matrix over the columns of an m×p subsample matrix, m ≥ 2.
pub fn correlation_matrix(x_sub: &Matrix) -> Result<CorrelationMatrix> {
    let m = x_sub.rows();
    let p = x_sub.cols();
    if m < 2 {
        return Err(Error::InvalidConfig(format!(
            "correlation subsample has {m} rows, need at least 2"
        )));
    }

    // Pass 1: center every column once; keep the squared norms.
    let mut centered = Matrix::zeros(p, m); // transposed for contiguous columns
    let mut norms = vec![0.0f64; p];
    for (j, norm) in norms.iter_mut().enumerate() {
        let mut sum = 0.0;
        for i in 0..m {
            sum += x_sub.get(i, j);
        }
        let mean = sum / m as f64;
        let row = centered.row_mut(j);
        let mut ss = 0.0;
        for (i, cell) in row.iter_mut().enumerate() {
            let d = x_sub.get(i, j) - mean;
            *cell = d;
            ss += d * d;
        }
        *norm = ss;
    }
    let valid: Vec<bool> = norms.iter().map(|&s| s > 0.0).collect();

    // Pass 2: one dot product per pair, parallel over the leading column.
    let upper: Vec<Vec<f64>> = (0..p)
        .into_par_iter()
        .map(|j| {
            let cj = centered.row(j);
            (j + 1..p)
                .map(|k| {
                    if valid[j] && valid[k] {
                        let ck = centered.row(k);
                        let dot: f64 = cj.iter().zip(ck).map(|(a, b)| a * b).sum();
                        if dot == norms[j] && norms[j] == norms[k] {
                            1.0 // bitwise-duplicate columns
                        } else if dot == -norms[j] && norms[j] == norms[k] {
                            -1.0
                        } else {
                            dot / (norms[j] * norms[k]).sqrt()
                        }
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();

    let mut rho = vec![0.0f64; p * p];
    for j in 0..p {
        rho[j * p + j] = 1.0;
        for (off, &v) in upper[j].iter().enumerate() {
            let k = j + 1 + off;
            rho[j * p + k] = v;
            rho[k * p + j] = v;
        }
    }
    Ok(CorrelationMatrix { rho, p, valid })
}
