//! Correlation-driven feature construction and multi-class boosting.
//!
//! The crate builds unsupervised "neighborhood" and "edge" features from
//! pairwise feature correlations and trains multi-class AdaBoost.MH
//! ensembles of Hamming trees on the result. Three interchangeable
//! feature-space strategies feed the booster (raw input columns, the
//! constructed representation, and lazily sampled Haar filters), all behind
//! the [`space::FeatureSpace`] trait and selectable by name through
//! [`space::SpaceRegistry`].
//!
//! Pipeline, end to end:
//! 1. load a dataset ([`data`]): MNIST-style IDX, CIFAR-10 binary batches,
//!    delimited text, or the JSON interchange format;
//! 2. optionally select input features with autoassociative boosting
//!    ([`boost::autoassociative_select`]);
//! 3. fit a [`features::FeatureTransform`] on a seeded instance subsample
//!    (correlations → neighborhoods → neighborhood features → edges);
//! 4. boost Hamming trees over the chosen feature space ([`boost::train`]);
//! 5. evaluate, replay learning curves, rank feature importance, export
//!    masks.
//!
//! Everything is deterministic under a fixed seed: same inputs produce
//! bit-identical models and semantically identical curves on one platform.

pub mod boost;
pub mod correlation;
pub mod data;
pub mod error;
pub mod features;
pub mod haar;
pub mod learner;
pub mod space;

pub use error::{Error, Result};
