use serde::{Deserialize, Serialize};

use crate::clustering::{Init, KMeansConfig, Variant};
use crate::corpus::NGramOrders;
use crate::error::{Error, Result};
use crate::lsa::SvdConfig;
use crate::svm::SvmConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    /// `pos/` + `neg/` directories, evaluated by cross-validation.
    Polarity,
    /// Predefined train/test split.
    Imdb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    #[default]
    NbMax,
    Frequency,
    BowNb,
    Lsa,
}

impl FeatureMode {
    pub fn uses_clusters(self) -> bool {
        matches!(self, FeatureMode::NbMax | FeatureMode::Frequency)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureMode::NbMax => "nb_max",
            FeatureMode::Frequency => "frequency",
            FeatureMode::BowNb => "bow_nb",
            FeatureMode::Lsa => "lsa",
        }
    }
}

/// K-means settings other than K and the seed, which live on the experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KMeansParams {
    pub iterations: usize,
    pub variant: Variant,
    pub batch_size: usize,
    pub init: Init,
    pub workers: usize,
}

impl Default for KMeansParams {
    fn default() -> Self {
        let d = KMeansConfig::default();
        Self {
            iterations: d.iterations,
            variant: d.variant,
            batch_size: d.batch_size,
            init: d.init,
            workers: d.workers,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SvmParams {
    #[serde(rename = "C")]
    pub c: f64,
    pub max_epochs: usize,
    pub tolerance: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        let d = SvmConfig::default();
        Self {
            c: d.c,
            max_epochs: d.max_epochs,
            tolerance: d.tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LsaParams {
    pub oversample: usize,
    pub power_iters: usize,
    pub raw_counts: bool,
}

impl Default for LsaParams {
    fn default() -> Self {
        let d = SvdConfig::default();
        Self {
            oversample: d.oversample,
            power_iters: d.power_iters,
            raw_counts: d.raw_counts,
        }
    }
}

/// One experiment. `folds: None` resolves to 10 for polarity data and to the
/// predefined split (0) for IMDB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dataset: DatasetKind,
    #[serde(default = "default_orders")]
    pub ngram_orders: NGramOrders,
    #[serde(rename = "K", alias = "k", default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub feature_mode: FeatureMode,
    #[serde(default)]
    pub kmeans: KMeansParams,
    #[serde(default)]
    pub svm: SvmParams,
    #[serde(default)]
    pub lsa: LsaParams,
    #[serde(default)]
    pub folds: Option<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Cluster the n-grams of every document once instead of the training
    /// vocabulary of each fold.
    #[serde(default)]
    pub cluster_on_all: bool,
}

fn default_orders() -> NGramOrders {
    NGramOrders::UNIGRAMS
}

fn default_k() -> usize {
    300
}

fn default_seed() -> u64 {
    42
}

impl ExperimentConfig {
    pub fn new(dataset: DatasetKind) -> Self {
        Self {
            name: None,
            dataset,
            ngram_orders: default_orders(),
            k: default_k(),
            feature_mode: FeatureMode::default(),
            kmeans: KMeansParams::default(),
            svm: SvmParams::default(),
            lsa: LsaParams::default(),
            folds: None,
            seed: default_seed(),
            cluster_on_all: false,
        }
    }

    pub fn folds(&self) -> usize {
        self.folds.unwrap_or(match self.dataset {
            DatasetKind::Polarity => 10,
            DatasetKind::Imdb => 0,
        })
    }

    pub fn kmeans_config(&self) -> KMeansConfig {
        KMeansConfig {
            k: self.k,
            iterations: self.kmeans.iterations,
            variant: self.kmeans.variant,
            batch_size: self.kmeans.batch_size,
            init: self.kmeans.init,
            seed: self.seed,
            workers: self.kmeans.workers,
        }
    }

    pub fn svm_config(&self) -> SvmConfig {
        SvmConfig {
            c: self.svm.c,
            max_epochs: self.svm.max_epochs,
            tolerance: self.svm.tolerance,
            seed: self.seed,
        }
    }

    pub fn svd_config(&self) -> SvdConfig {
        SvdConfig {
            oversample: self.lsa.oversample,
            power_iters: self.lsa.power_iters,
            seed: self.seed,
            raw_counts: self.lsa.raw_counts,
        }
    }

    /// Short label such as `1+2 K=300 nb_max`.
    pub fn label(&self) -> String {
        match &self.name {
            Some(n) => n.clone(),
            None if self.feature_mode.uses_clusters() || self.feature_mode == FeatureMode::Lsa => {
                format!("{} K={} {}", self.ngram_orders, self.k, self.feature_mode.as_str())
            }
            None => format!("{} {}", self.ngram_orders, self.feature_mode.as_str()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ngram_orders.is_empty() {
            return Err(Error::Config("ngram_orders must not be empty".into()));
        }
        if self.k == 0 && self.feature_mode != FeatureMode::BowNb {
            return Err(Error::Config("K must be positive".into()));
        }
        if self.folds() == 1 {
            return Err(Error::Config("folds must be 0 (predefined split) or ≥ 2".into()));
        }
        if self.feature_mode == FeatureMode::Lsa && self.ngram_orders != NGramOrders::UNIGRAMS {
            return Err(Error::Config("the lsa mode works on unigrams only".into()));
        }
        if self.feature_mode.uses_clusters() {
            self.kmeans_config().validate()?;
        }
        self.svm_config().validate()
    }
}
