use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::ExperimentConfig;
use crate::error::Result;

/// Pipeline stages in report order.
pub const STAGES: [&str; 5] = ["ngram_repr", "kmeans", "doc_repr", "svm_train", "total"];

/// Outcome of one experiment. Stage times are wall-clock seconds; the
/// per-stage values are summed over folds, `total` is the elapsed time of
/// the whole run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub dataset: String,
    pub accuracy: f64,
    pub per_fold: Vec<f64>,
    pub stage_times: BTreeMap<String, f64>,
    /// Distinct n-grams clustered (or used as features) per fold.
    pub vocabulary_sizes: Vec<usize>,
    /// Test n-grams absent from training, assigned to their nearest centroid.
    pub unseen_test_ngrams: Vec<usize>,
    pub config_echo: ExperimentConfig,
}

impl ExperimentReport {
    pub fn stage_time(&self, stage: &str) -> f64 {
        self.stage_times.get(stage).copied().unwrap_or(0.0)
    }

    /// Copy with every timing set to zero, for determinism comparisons.
    pub fn without_timings(&self) -> Self {
        let mut r = self.clone();
        for v in r.stage_times.values_mut() {
            *v = 0.0;
        }
        r
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    pub fn read_json<R: Read>(r: R) -> Result<Self> {
        Ok(serde_json::from_reader(r)?)
    }
}

/// Aggregate table: one row per report, accuracy as a percentage and stage
/// times in seconds, both with two decimals.
pub fn write_csv<W: Write>(w: W, reports: &[ExperimentReport]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["dataset", "orders", "K", "mode", "accuracy"];
    header.extend(STAGES);
    out.write_record(&header)?;
    for r in reports {
        let c = &r.config_echo;
        let mut row = vec![
            r.dataset.clone(),
            c.ngram_orders.to_string(),
            c.k.to_string(),
            c.feature_mode.as_str().to_string(),
            format!("{:.2}", 100.0 * r.accuracy),
        ];
        row.extend(STAGES.iter().map(|s| format!("{:.2}", r.stage_time(s))));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}
