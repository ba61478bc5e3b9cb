//! The AdaBoost.MH loop: weight-matrix maintenance, coefficient computation,
//! ensemble assembly, prediction and evaluation.
//!
//! One boosting iteration learns a Hamming tree against the current weights,
//! checks its edge γ = Σᵢ Σ_ℓ w_{i,ℓ} h_ℓ(xᵢ) y_{i,ℓ}, converts it to the
//! stage coefficient α = ½·ln((1+γ)/(1−γ)), and reweights multiplicatively.
//! Training aborts cleanly (returning the ensemble so far) when no learner
//! achieves γ > 0.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Geometry, LabelCode, LabelSigns, Matrix};
use crate::error::{Error, Result};
use crate::features::FeatureTransform;
use crate::learner::{learn_tree, HammingTree, WyMatrix};
use crate::space::{FeatureKey, FeatureSpace, SpaceInput, SpaceRegistry};

mod autoassoc;
mod curve;
mod model;

pub use autoassoc::autoassociative_select;
pub use curve::{CurvePoint, LearningCurve};
pub use model::{load_ensemble, save_ensemble};

/// Edge values are capped at 1 − 1e-7 before the coefficient formula so
/// separable data cannot push α to infinity.
pub const EDGE_CAP: f64 = 1.0 - 1e-7;

/// Boosting state: n×K nonnegative weights summing to 1.
#[derive(Debug, Clone)]
pub struct WeightMatrix {
    w: Vec<f64>,
    n: usize,
    k: usize,
}

/// Initial weight layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightInit {
    /// 1/(2n) on the correct label, 1/(2n(K−1)) on each incorrect one.
    Standard,
    /// 1/(nK) everywhere.
    Uniform,
}

impl WeightMatrix {
    pub fn init(labels: &LabelCode, init: WeightInit) -> Result<WeightMatrix> {
        let (n, k) = (labels.n(), labels.k());
        if n == 0 || k == 0 {
            return Err(Error::InvalidConfig("empty label set".into()));
        }
        let w = match init {
            WeightInit::Uniform => vec![1.0 / (n * k) as f64; n * k],
            WeightInit::Standard => {
                if k < 2 {
                    return Err(Error::InvalidConfig(
                        "standard weight init needs at least 2 classes".into(),
                    ));
                }
                let correct = 1.0 / (2 * n) as f64;
                let incorrect = 1.0 / (2 * n * (k - 1)) as f64;
                let mut w = vec![0.0; n * k];
                for i in 0..n {
                    for l in 0..k {
                        w[i * k + l] = if labels.sign(i, l) > 0.0 {
                            correct
                        } else {
                            incorrect
                        };
                    }
                }
                w
            }
        };
        Ok(WeightMatrix { w, n, k })
    }

    pub fn uniform(n: usize, k: usize) -> WeightMatrix {
        WeightMatrix {
            w: vec![1.0 / (n * k) as f64; n * k],
            n,
            k,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn total(&self) -> f64 {
        self.w.iter().sum()
    }
}

/// ±1 predictions of one base learner on a set of instances.
#[derive(Debug, Clone)]
pub struct SignMatrix {
    data: Vec<i8>,
    n: usize,
    k: usize,
}

impl SignMatrix {
    pub fn from_parts(data: Vec<i8>, n: usize, k: usize) -> SignMatrix {
        debug_assert_eq!(data.len(), n * k);
        SignMatrix { data, n, k }
    }

    pub fn from_tree(tree: &HammingTree, space: &dyn FeatureSpace) -> SignMatrix {
        let n = space.n_rows();
        let k = tree.nodes[0].stump.votes.len();
        let mut data = vec![0i8; n * k];
        data.par_chunks_mut(k).enumerate().for_each(|(i, row)| {
            let (leaf, phi) = tree.route(&|key: &FeatureKey| space.value(key, i));
            let stump = &tree.nodes[leaf].stump;
            for (cell, &v) in row.iter_mut().zip(&stump.votes) {
                *cell = if phi > 0.0 { v } else { -v };
            }
        });
        SignMatrix { data, n, k }
    }

    #[inline]
    pub fn sign(&self, i: usize, l: usize) -> f64 {
        self.data[i * self.k + l] as f64
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

/// γ(h, W) = Σᵢ Σ_ℓ w_{i,ℓ} h_ℓ(xᵢ) y_{i,ℓ} ∈ [−1, 1].
pub fn edge_of(h: &SignMatrix, w: &WeightMatrix, labels: &impl LabelSigns) -> Result<f64> {
    if h.n() != w.n() || h.k() != w.k() || labels.n() != w.n() || labels.k() != w.k() {
        return Err(Error::DimensionMismatch {
            what: "edge operands",
            expected: w.n() * w.k(),
            found: h.n() * h.k(),
        });
    }
    let k = w.k();
    let mut gamma = 0.0;
    for i in 0..w.n() {
        for l in 0..k {
            gamma += w.w[i * k + l] * h.sign(i, l) * labels.sign(i, l);
        }
    }
    Ok(gamma)
}

/// α = ½·ln((1+γ)/(1−γ)), with |γ| capped at 1 − 1e-7. The training loop is
/// responsible for aborting on γ ≤ 0 before calling this.
pub fn alpha_of(gamma: f64) -> f64 {
    let g = gamma.clamp(-EDGE_CAP, EDGE_CAP);
    0.5 * ((1.0 + g) / (1.0 - g)).ln()
}

/// Multiplicative update w′ ∝ w·exp(−α h y), renormalized to total 1.
/// Returns the normalizer Z.
pub fn update_weights(
    w: &mut WeightMatrix,
    alpha: f64,
    h: &SignMatrix,
    labels: &impl LabelSigns,
) -> f64 {
    let k = w.k;
    let agree = (-alpha).exp();
    let disagree = alpha.exp();
    w.w.par_chunks_mut(k).enumerate().for_each(|(i, row)| {
        for (l, cell) in row.iter_mut().enumerate() {
            *cell *= if h.sign(i, l) * labels.sign(i, l) > 0.0 {
                agree
            } else {
                disagree
            };
        }
    });
    let z: f64 = w.w.iter().sum();
    w.w.par_iter_mut().for_each(|cell| *cell /= z);
    z
}

/// Where a trained model's inputs come from; enough to rebuild the feature
/// space on any compatible dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum SpaceSchema {
    Raw {
        dim: usize,
        geometry: Option<Geometry>,
    },
    Constructed {
        transform: FeatureTransform,
    },
    Haar {
        geometry: Geometry,
    },
}

impl SpaceSchema {
    pub fn mode(&self) -> &'static str {
        match self {
            SpaceSchema::Raw { .. } => "raw",
            SpaceSchema::Constructed { .. } => "constructed",
            SpaceSchema::Haar { .. } => "haar",
        }
    }

    /// Raw input width the schema expects.
    pub fn raw_dim(&self) -> usize {
        match self {
            SpaceSchema::Raw { dim, .. } => *dim,
            SpaceSchema::Constructed { transform } => transform.raw_dim,
            SpaceSchema::Haar { geometry } => geometry.pixel_count(),
        }
    }

    pub fn geometry(&self) -> Option<&Geometry> {
        match self {
            SpaceSchema::Raw { geometry, .. } => geometry.as_ref(),
            SpaceSchema::Constructed { transform } => transform.geometry.as_ref(),
            SpaceSchema::Haar { geometry } => Some(geometry),
        }
    }

    pub fn transform(&self) -> Option<&FeatureTransform> {
        match self {
            SpaceSchema::Constructed { transform } => Some(transform),
            _ => None,
        }
    }

    /// Validates the input shape and builds the space through the registry.
    pub fn build(
        &self,
        matrix: &Matrix,
        geometry: Option<&Geometry>,
    ) -> Result<Box<dyn FeatureSpace>> {
        if matrix.cols() != self.raw_dim() {
            return Err(Error::Schema(format!(
                "model expects raw width {}, dataset has {}",
                self.raw_dim(),
                matrix.cols()
            )));
        }
        if let SpaceSchema::Haar { geometry: expected } = self {
            if geometry != Some(expected) {
                return Err(Error::Schema(format!(
                    "haar model expects geometry {}x{}x{}",
                    expected.height, expected.width, expected.channels
                )));
            }
        }
        let input = SpaceInput {
            matrix,
            geometry: self.geometry().or(geometry),
            transform: self.transform(),
        };
        SpaceRegistry::builtin().build(self.mode(), &input)
    }
}

/// Boosting hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub iterations: usize,
    pub leaves: usize,
    pub d_prime: usize,
    pub seed: u64,
    /// Test-evaluation cadence; `None` means every iteration up to 10⁴ total
    /// iterations and every 10th beyond.
    pub curve_cadence: Option<usize>,
    pub weight_init: WeightInit,
}

impl TrainConfig {
    pub fn resolved_cadence(&self) -> usize {
        match self.curve_cadence {
            Some(c) if c >= 1 => c,
            _ => {
                if self.iterations <= 10_000 {
                    1
                } else {
                    10
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub alpha: f64,
    pub tree: HammingTree,
}

/// Trained model: stages with positive coefficients, predicted class =
/// argmax of Σₜ αₜ hₜ(x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub k: usize,
    pub label_names: Vec<String>,
    pub schema: SpaceSchema,
    pub config: TrainConfig,
    pub stages: Vec<Stage>,
}

/// Per-iteration diagnostics kept alongside the curve.
#[derive(Debug, Clone)]
pub struct IterationStat {
    pub iteration: usize,
    pub gamma: f64,
    pub alpha: f64,
    pub z: f64,
    /// Σₜ ln Zₜ so far. The plain product underflows on long separable runs;
    /// the log form keeps the strict-decrease invariant assertable.
    pub log_z_product: f64,
    /// exp(log_z_product); 0 once the product underflows.
    pub z_product: f64,
    pub weight_total: f64,
    /// Weighted Hamming loss of the combined score under the initial
    /// weights; bounded by the Z product.
    pub weighted_hamming: f64,
}

pub struct EvalSet<'a> {
    pub space: &'a dyn FeatureSpace,
    pub labels: &'a LabelCode,
}

pub struct TrainOutcome {
    pub ensemble: Ensemble,
    pub curve: LearningCurve,
    pub stats: Vec<IterationStat>,
    /// Iteration at which no positive-edge learner was found, if any.
    pub aborted_at: Option<usize>,
}

pub struct TrainJob<'a> {
    pub space: &'a dyn FeatureSpace,
    pub labels: &'a LabelCode,
    pub config: TrainConfig,
    pub schema: SpaceSchema,
    pub label_names: Vec<String>,
    pub eval: Option<EvalSet<'a>>,
}

/// Smallest class index wins ties.
pub(crate) fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in scores.iter().enumerate().skip(1) {
        if v > scores[best] {
            best = i;
        }
    }
    best
}

fn error_rate(scores: &[f64], labels: &LabelCode) -> f64 {
    let k = labels.k();
    let errors: usize = (0..labels.n())
        .into_par_iter()
        .map(|i| {
            let predicted = argmax(&scores[i * k..(i + 1) * k]) as u32 + 1;
            usize::from(predicted != labels.labels()[i])
        })
        .sum();
    errors as f64 / labels.n() as f64
}

fn accumulate_scores(scores: &mut [f64], alpha: f64, h: &SignMatrix) {
    let k = h.k();
    scores.par_chunks_mut(k).enumerate().for_each(|(i, row)| {
        for (l, cell) in row.iter_mut().enumerate() {
            *cell += alpha * h.sign(i, l);
        }
    });
}

/// Weighted Hamming loss of the combined scores under weights `w1`;
/// a zero score counts as an error.
fn weighted_hamming(scores: &[f64], w1: &WeightMatrix, labels: &LabelCode) -> f64 {
    let k = labels.k();
    let mut loss = 0.0;
    for i in 0..labels.n() {
        for l in 0..k {
            if scores[i * k + l] * labels.sign(i, l) <= 0.0 {
                loss += w1.w[i * k + l];
            }
        }
    }
    loss
}

pub fn train(job: TrainJob) -> Result<TrainOutcome> {
    let TrainJob {
        space,
        labels,
        config,
        schema,
        label_names,
        eval,
    } = job;
    let (n, k) = (labels.n(), labels.k());
    if config.iterations < 1 {
        return Err(Error::InvalidConfig("need at least 1 iteration".into()));
    }
    if config.leaves < 1 {
        return Err(Error::InvalidConfig("need at least 1 leaf".into()));
    }
    if config.d_prime < 1 {
        return Err(Error::InvalidConfig("d' must be at least 1".into()));
    }
    if let Some(pool) = space.pool_size() {
        if config.d_prime as u64 > pool {
            return Err(Error::InvalidConfig(format!(
                "d' = {} exceeds the feature pool ({pool})",
                config.d_prime
            )));
        }
    }
    if space.n_rows() != n {
        return Err(Error::DimensionMismatch {
            what: "training rows",
            expected: n,
            found: space.n_rows(),
        });
    }
    if let Some(es) = &eval {
        if es.space.n_rows() != es.labels.n() || es.labels.k() != k {
            return Err(Error::DimensionMismatch {
                what: "eval rows",
                expected: es.labels.n(),
                found: es.space.n_rows(),
            });
        }
    }

    let mut weights = WeightMatrix::init(labels, config.weight_init)?;
    let w1 = weights.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let cadence = config.resolved_cadence();

    let mut train_scores = vec![0.0f64; n * k];
    let mut eval_scores = eval.as_ref().map(|es| vec![0.0f64; es.labels.n() * k]);

    let mut stages: Vec<Stage> = Vec::with_capacity(config.iterations);
    let mut points: Vec<CurvePoint> = Vec::with_capacity(config.iterations);
    let mut stats: Vec<IterationStat> = Vec::with_capacity(config.iterations);
    let mut log_z_product = 0.0f64;
    let mut aborted_at = None;
    let started = std::time::Instant::now();

    for t in 1..=config.iterations {
        let wy = WyMatrix::new(weights.as_slice(), labels);
        let fit = learn_tree(space, &wy, config.leaves, config.d_prime, &mut rng)?;
        let h = SignMatrix::from_tree(&fit.tree, space);
        let gamma = edge_of(&h, &weights, labels)?;
        if gamma <= 0.0 {
            log::warn!("iteration {t}: no learner with positive edge (γ = {gamma}); stopping");
            aborted_at = Some(t);
            break;
        }
        let alpha = alpha_of(gamma);
        let z = update_weights(&mut weights, alpha, &h, labels);
        log_z_product += z.ln();

        accumulate_scores(&mut train_scores, alpha, &h);
        let train_error = error_rate(&train_scores, labels);

        let test_error = if let (Some(es), Some(scores)) = (&eval, eval_scores.as_mut()) {
            let h_eval = SignMatrix::from_tree(&fit.tree, es.space);
            accumulate_scores(scores, alpha, &h_eval);
            if t % cadence == 0 || t == config.iterations {
                Some(error_rate(scores, es.labels))
            } else {
                None
            }
        } else {
            None
        };

        stats.push(IterationStat {
            iteration: t,
            gamma,
            alpha,
            z,
            log_z_product,
            z_product: log_z_product.exp(),
            weight_total: weights.total(),
            weighted_hamming: weighted_hamming(&train_scores, &w1, labels),
        });
        points.push(CurvePoint {
            iteration: t,
            train_error,
            test_error,
            elapsed_seconds: started.elapsed().as_secs_f64(),
        });
        stages.push(Stage {
            alpha,
            tree: fit.tree,
        });
    }

    Ok(TrainOutcome {
        ensemble: Ensemble {
            k,
            label_names,
            schema,
            config,
            stages,
        },
        curve: LearningCurve { points },
        stats,
        aborted_at,
    })
}

impl Ensemble {
    /// Score vector Σₜ αₜ hₜ(x) for one row of a built space.
    pub fn scores_for_row(&self, space: &dyn FeatureSpace, row: usize, scores: &mut [f64]) {
        scores.iter_mut().for_each(|s| *s = 0.0);
        let mut out = vec![0.0; self.k];
        for stage in &self.stages {
            stage.tree.output_for_row(space, row, &mut out);
            for (s, o) in scores.iter_mut().zip(&out) {
                *s += stage.alpha * o;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub errors: usize,
    pub n: usize,
    pub error: f64,
}

fn check_label_space(ens: &Ensemble, ds: &Dataset) -> Result<()> {
    if ds.k() != ens.k || ds.label_names() != ens.label_names.as_slice() {
        return Err(Error::Schema(format!(
            "model trained on classes {:?}, dataset has {:?}",
            ens.label_names,
            ds.label_names()
        )));
    }
    Ok(())
}

/// Multiclass zero-one error of the full ensemble on a labeled dataset.
pub fn evaluate(ens: &Ensemble, ds: &Dataset) -> Result<Evaluation> {
    check_label_space(ens, ds)?;
    let space = ens.schema.build(ds.matrix(), ds.geometry())?;
    let k = ens.k;
    let errors: usize = (0..ds.n())
        .into_par_iter()
        .map_init(
            || vec![0.0; k],
            |scores, i| {
                ens.scores_for_row(space.as_ref(), i, scores);
                let predicted = argmax(scores) as u32 + 1;
                usize::from(predicted != ds.labels()[i])
            },
        )
        .sum();
    Ok(Evaluation {
        errors,
        n: ds.n(),
        error: errors as f64 / ds.n() as f64,
    })
}

/// Zero-one error of every prefix ensemble in one pass (prefix sums of the
/// per-stage score vectors).
pub fn replay_curve(ens: &Ensemble, ds: &Dataset) -> Result<Vec<f64>> {
    check_label_space(ens, ds)?;
    let space = ens.schema.build(ds.matrix(), ds.geometry())?;
    let k = ens.k;
    let t = ens.stages.len();
    let totals = (0..ds.n())
        .into_par_iter()
        .fold(
            || vec![0u32; t],
            |mut acc, i| {
                let mut scores = vec![0.0; k];
                let mut out = vec![0.0; k];
                for (s, stage) in ens.stages.iter().enumerate() {
                    stage.tree.output_for_row(space.as_ref(), i, &mut out);
                    for (sc, o) in scores.iter_mut().zip(&out) {
                        *sc += stage.alpha * o;
                    }
                    let predicted = argmax(&scores) as u32 + 1;
                    if predicted != ds.labels()[i] {
                        acc[s] += 1;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u32; t],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
                a
            },
        );
    Ok(totals
        .into_iter()
        .map(|e| e as f64 / ds.n() as f64)
        .collect())
}

/// Class (1..=K) and score vector for one raw instance.
pub fn predict_instance(ens: &Ensemble, x: &[f64]) -> Result<(u32, Vec<f64>)> {
    let matrix = Matrix::from_vec(x.to_vec(), 1, x.len())?;
    let space = ens.schema.build(&matrix, ens.schema.geometry())?;
    let mut scores = vec![0.0; ens.k];
    ens.scores_for_row(space.as_ref(), 0, &mut scores);
    Ok((argmax(&scores) as u32 + 1, scores))
}

/// Per-feature importance: the sum of α over stages whose trees use the
/// feature anywhere, ranked descending (feature key breaks ties).
pub fn feature_importance(ens: &Ensemble) -> Vec<(FeatureKey, f64)> {
    use std::collections::{BTreeMap, BTreeSet};
    let mut totals: BTreeMap<FeatureKey, f64> = BTreeMap::new();
    for stage in &ens.stages {
        let keys: BTreeSet<&FeatureKey> = stage.tree.feature_keys().collect();
        for key in keys {
            *totals.entry(key.clone()).or_insert(0.0) += stage.alpha;
        }
    }
    let mut ranked: Vec<(FeatureKey, f64)> = totals.into_iter().collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    ranked
}

#[cfg(test)]
mod tests;
