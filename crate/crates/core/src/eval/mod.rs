//! Cross-validation, accuracy, stage timing and reports.

mod cache;
mod config;
mod cv;
mod pipeline;
mod report;
#[cfg(test)]
mod tests;

pub use cache::{ArtifactCache, Fingerprint};
pub use config::{DatasetKind, ExperimentConfig, FeatureMode, KMeansParams, LsaParams, SvmParams};
pub use cv::{accuracy, kfold_split, Fold};
pub use pipeline::{
    fingerprint_vectors, run_experiment, Concepts, FeatureMatrix, FittedFold, Representation, RunContext, RunOptions, StageTimes,
};
pub use report::{write_csv, ExperimentReport, STAGES};
