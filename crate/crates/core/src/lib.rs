//! Bag-of-concepts document representations for sentiment classification.
//!
//! N-grams are embedded as the mean of their word vectors, clustered with
//! K-means into semantic concepts, and each document becomes a K-dimensional
//! vector: per concept, either the number of its n-grams or the signed
//! naive-Bayes log-count ratio of largest magnitude. A linear SVM with
//! squared hinge loss classifies the result. Bag-of-words + NB and LSA
//! baselines share the same evaluation harness.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the precision.

pub mod clustering;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod eval;
pub mod features;
pub mod lsa;
mod parallel;
pub mod scalar;
pub mod sparse;
pub mod svm;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type WordVectors32 = embeddings::WordVectors<f32>;
pub type WordVectors64 = embeddings::WordVectors<f64>;
pub type Centroids32 = clustering::Centroids<f32>;
pub type Centroids64 = clustering::Centroids<f64>;
pub type KMeansFit32 = clustering::KMeansFit<f32>;
pub type KMeansFit64 = clustering::KMeansFit<f64>;
pub type LogCountRatio32 = features::LogCountRatio<f32>;
pub type LogCountRatio64 = features::LogCountRatio<f64>;
pub type LinearModel32 = svm::LinearModel<f32>;
pub type LinearModel64 = svm::LinearModel<f64>;
pub type SvdFactors32 = lsa::SvdFactors<f32>;
pub type SvdFactors64 = lsa::SvdFactors<f64>;
