//! Fold-level pipeline: n-gram vocabulary and embeddings, K-means concepts,
//! document features, SVM. Everything is fit on the training indices of a
//! fold; test documents only pass through the fitted objects.

use std::collections::BTreeMap;
use std::time::Instant;

use log::info;
use ndarray::Array2;

use super::cache::{ArtifactCache, Fingerprint};
use super::cv::{accuracy, kfold_split, Fold};
use super::report::{ExperimentReport, STAGES};
use super::{ExperimentConfig, FeatureMode};
use crate::clustering::{self, Assignment, Centroids};
use crate::corpus::{count_encoded, CountMatrix, Dataset, NGramVocabulary};
use crate::embeddings::{embed_keys, WordVectors};
use crate::error::{Error, Result};
use crate::features::{bow_nb_features, concept_features_freq, concept_features_nb, log_count_ratio, LogCountRatio};
use crate::lsa::{build_lsa_matrix, fold_in, lsa_document_features, truncated_svd, SvdFactors};
use crate::parallel::map_indices;
use crate::scalar::Scalar;
use crate::sparse::{CsrMatrix, FeatureRows};
use crate::svm::{svm_train, LinearModel};

/// Dense concept features or sparse bag-of-words features.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureMatrix {
    Dense(Array2<f64>),
    Sparse(CsrMatrix<f64>),
}

impl FeatureRows<f64> for FeatureMatrix {
    fn n_rows(&self) -> usize {
        match self {
            Self::Dense(m) => FeatureRows::n_rows(m),
            Self::Sparse(m) => FeatureRows::n_rows(m),
        }
    }

    fn n_cols(&self) -> usize {
        match self {
            Self::Dense(m) => FeatureRows::n_cols(m),
            Self::Sparse(m) => FeatureRows::n_cols(m),
        }
    }

    fn row_dot(&self, i: usize, w: &[f64]) -> f64 {
        match self {
            Self::Dense(m) => m.row_dot(i, w),
            Self::Sparse(m) => m.row_dot(i, w),
        }
    }

    fn row_axpy(&self, i: usize, alpha: f64, w: &mut [f64]) {
        match self {
            Self::Dense(m) => m.row_axpy(i, alpha, w),
            Self::Sparse(m) => m.row_axpy(i, alpha, w),
        }
    }

    fn row_sq_norm(&self, i: usize) -> f64 {
        match self {
            Self::Dense(m) => m.row_sq_norm(i),
            Self::Sparse(m) => m.row_sq_norm(i),
        }
    }

    fn find_non_finite(&self) -> Option<(usize, usize)> {
        match self {
            Self::Dense(m) => m.find_non_finite(),
            Self::Sparse(m) => m.find_non_finite(),
        }
    }
}

impl FeatureMatrix {
    fn fingerprint(&self, f: &mut Fingerprint) {
        match self {
            Self::Dense(m) => {
                f.str("dense")
                    .u64(m.nrows() as u64)
                    .u64(m.ncols() as u64)
                    .scalars(m.iter().copied());
            }
            Self::Sparse(m) => {
                f.str("sparse").u64(m.n_rows() as u64).u64(m.n_cols() as u64);
                for i in 0..m.n_rows() {
                    let (idx, val) = m.row(i);
                    f.u64(idx.len() as u64);
                    for (&j, &v) in idx.iter().zip(val) {
                        f.u64(j as u64).scalars([v]);
                    }
                }
            }
        }
    }
}

/// Seconds spent per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimes {
    pub ngram_repr: f64,
    pub kmeans: f64,
    pub doc_repr: f64,
    pub svm_train: f64,
}

impl StageTimes {
    fn add(&mut self, o: &StageTimes) {
        self.ngram_repr += o.ngram_repr;
        self.kmeans += o.kmeans;
        self.doc_repr += o.doc_repr;
        self.svm_train += o.svm_train;
    }
}

/// Concepts: centroids plus the label of every vocabulary n-gram.
#[derive(Debug, Clone)]
pub struct Concepts<E> {
    pub vocabulary: NGramVocabulary,
    pub centroids: Centroids<E>,
    pub assignment: Assignment,
}

/// Document representation fit on training documents: vocabulary, log-count
/// ratios and, depending on the mode, concepts or LSA factors.
#[derive(Debug, Clone)]
pub struct Representation<E> {
    pub vocabulary: NGramVocabulary,
    pub ratio: LogCountRatio<f64>,
    pub concepts: Option<Concepts<E>>,
    pub lsa: Option<SvdFactors<f64>>,
}

/// Everything fit on one fold's training documents.
#[derive(Debug, Clone)]
pub struct FittedFold<E> {
    pub representation: Representation<E>,
    pub model: LinearModel<f64>,
    pub times: StageTimes,
}

/// Shared inputs of a run.
pub struct RunContext<'a, E> {
    pub config: &'a ExperimentConfig,
    pub dataset: &'a Dataset,
    pub vectors: &'a WordVectors<E>,
    pub cache: Option<&'a ArtifactCache>,
    vectors_fingerprint: Option<String>,
}

impl<'a, E: Scalar> RunContext<'a, E> {
    pub fn new(config: &'a ExperimentConfig, dataset: &'a Dataset, vectors: &'a WordVectors<E>, cache: Option<&'a ArtifactCache>) -> Self {
        let vectors_fingerprint = cache.map(|_| fingerprint_vectors(vectors));
        Self {
            config,
            dataset,
            vectors,
            cache,
            vectors_fingerprint,
        }
    }

    fn encode(&self, indices: &[usize]) -> Vec<Vec<Option<u32>>> {
        let dict = self.vectors.dictionary();
        indices.iter().map(|&i| dict.encode(&self.dataset.documents[i].tokens)).collect()
    }

    fn embed(&self, vocab: &NGramVocabulary, from: usize) -> Result<Array2<E>> {
        embed_keys(vocab, &vocab.keys()[from..], self.vectors)
    }

    /// Clusters the n-gram vectors of `vocab`, consulting the cache.
    fn cluster(&self, vocab: NGramVocabulary, table: &Array2<E>) -> Result<Concepts<E>> {
        let kconf = self.config.kmeans_config();
        // A fresh fit already labels every point; only cached centroids need
        // a separate assignment pass.
        let mut fresh = None;
        let mut fit = || -> Result<Centroids<E>> {
            let f = clustering::fit(table.view(), &kconf)?;
            fresh = Some(f.assignment);
            Ok(f.centroids)
        };
        let centroids = match (self.cache, &self.vectors_fingerprint) {
            (Some(cache), Some(vfp)) => {
                let mut f = Fingerprint::new("centroids");
                f.str(vfp)
                    .str(std::any::type_name::<E>())
                    .str(&serde_json::to_string(&kconf)?)
                    .u64(vocab.len() as u64);
                for key in vocab.keys() {
                    f.u64(key.n() as u64);
                    for &id in key.ids() {
                        f.u64(id as u64);
                    }
                }
                cache.centroids(&f.hex(), fit)?
            }
            _ => fit()?,
        };
        if centroids.k() != kconf.k || centroids.dim() != table.ncols() {
            return Err(Error::Format {
                what: "cached centroids",
                message: "shape does not match the configuration".into(),
            });
        }
        let assignment = match fresh {
            Some(a) => a,
            None => clustering::assign_all(table.view(), &centroids, kconf.workers)?,
        };
        Ok(Concepts {
            vocabulary: vocab,
            centroids,
            assignment,
        })
    }

    fn train_model(&self, features: &FeatureMatrix, labels: &[i8]) -> Result<LinearModel<f64>> {
        let sconf = self.config.svm_config();
        let train = || svm_train(features, labels, &sconf);
        match self.cache {
            Some(cache) => {
                let mut f = Fingerprint::new("model");
                f.str(&serde_json::to_string(&sconf)?);
                features.fingerprint(&mut f);
                f.bytes(&labels.iter().map(|&y| y as u8).collect::<Vec<_>>());
                cache.model(&f.hex(), train)
            }
            None => train(),
        }
    }

    /// Vocabulary of every document, clustered once (`cluster_on_all`).
    pub fn shared_concepts(&self) -> Result<(Concepts<E>, StageTimes)> {
        let mut times = StageTimes::default();
        let t = Instant::now();
        let all: Vec<usize> = (0..self.dataset.len()).collect();
        let encoded = self.encode(&all);
        let vocab = NGramVocabulary::from_encoded(
            self.vectors.dictionary().clone(),
            encoded.iter().map(Vec::as_slice),
            self.config.ngram_orders,
        )
        .map_err(|e| e.in_stage("ngram_repr"))?;
        let table = self.embed(&vocab, 0).map_err(|e| e.in_stage("ngram_repr"))?;
        times.ngram_repr = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let concepts = self.cluster(vocab, &table).map_err(|e| e.in_stage("kmeans"))?;
        times.kmeans = t.elapsed().as_secs_f64();
        Ok((concepts, times))
    }

    /// Vocabulary of the documents at `indices`.
    pub fn vocabulary(&self, indices: &[usize]) -> Result<NGramVocabulary> {
        let encoded = self.encode(indices);
        NGramVocabulary::from_encoded(
            self.vectors.dictionary().clone(),
            encoded.iter().map(Vec::as_slice),
            self.config.ngram_orders,
        )
    }

    /// Assigns every n-gram of `vocab` to its nearest centroid.
    pub fn concepts_from(&self, vocab: NGramVocabulary, centroids: Centroids<E>) -> Result<Concepts<E>> {
        let table = self.embed(&vocab, 0).map_err(|e| e.in_stage("ngram_repr"))?;
        let assignment = clustering::assign_all(table.view(), &centroids, self.config.kmeans.workers).map_err(|e| e.in_stage("kmeans"))?;
        Ok(Concepts {
            vocabulary: vocab,
            centroids,
            assignment,
        })
    }

    /// Fits the representation on `train` and returns it with the training
    /// features and labels. With `shared` the given concepts replace the
    /// per-fold vocabulary and clustering.
    pub fn fit_representation(
        &self,
        train: &[usize],
        shared: Option<&Concepts<E>>,
        times: &mut StageTimes,
    ) -> Result<(Representation<E>, FeatureMatrix, Vec<i8>)> {
        let config = self.config;
        let mode = config.feature_mode;

        let t = Instant::now();
        let encoded = self.encode(train);
        let (vocabulary, table) = match shared {
            Some(s) if mode.uses_clusters() => (s.vocabulary.clone(), None),
            _ => {
                let vocab = NGramVocabulary::from_encoded(
                    self.vectors.dictionary().clone(),
                    encoded.iter().map(Vec::as_slice),
                    config.ngram_orders,
                )
                .map_err(|e| e.in_stage("ngram_repr"))?;
                let table = if mode.uses_clusters() {
                    Some(self.embed(&vocab, 0).map_err(|e| e.in_stage("ngram_repr"))?)
                } else {
                    None
                };
                (vocab, table)
            }
        };
        times.ngram_repr = t.elapsed().as_secs_f64();

        let t = Instant::now();
        let concepts = match (shared, table) {
            (Some(s), _) if mode.uses_clusters() => Some(s.clone()),
            (_, Some(table)) => Some(self.cluster(vocabulary.clone(), &table).map_err(|e| e.in_stage("kmeans"))?),
            _ => None,
        };
        times.kmeans = t.elapsed().as_secs_f64();

        let t = Instant::now();
        let labels = self.dataset.signs(train);
        let counts = count_encoded(encoded.iter().map(Vec::as_slice), &vocabulary);
        let ratio = log_count_ratio::<f64>(&counts, &labels).map_err(|e| e.in_stage("doc_repr"))?;
        let (features, lsa) = self
            .featurize(&counts, &ratio, concepts.as_ref().map(|c| &c.assignment), None)
            .map_err(|e| e.in_stage("doc_repr"))?;
        times.doc_repr = t.elapsed().as_secs_f64();

        let representation = Representation {
            vocabulary,
            ratio,
            concepts,
            lsa,
        };
        Ok((representation, features, labels))
    }

    /// Fits every stage on `train`.
    pub fn fit_fold(&self, train: &[usize], shared: Option<&Concepts<E>>) -> Result<FittedFold<E>> {
        let mut times = StageTimes::default();
        let (representation, features, labels) = self.fit_representation(train, shared, &mut times)?;
        let t = Instant::now();
        let model = self.train_model(&features, &labels).map_err(|e| e.in_stage("svm_train"))?;
        times.svm_train = t.elapsed().as_secs_f64();
        Ok(FittedFold {
            representation,
            model,
            times,
        })
    }

    /// Features for `counts`. Training passes `factors: None` and gets the
    /// SVD back in LSA mode; test documents pass the fitted factors.
    fn featurize(
        &self,
        counts: &CountMatrix,
        ratio: &LogCountRatio<f64>,
        assignment: Option<&Assignment>,
        factors: Option<&SvdFactors<f64>>,
    ) -> Result<(FeatureMatrix, Option<SvdFactors<f64>>)> {
        let k = self.config.k;
        Ok(match self.config.feature_mode {
            FeatureMode::NbMax => (
                FeatureMatrix::Dense(concept_features_nb(counts, assignment.expect("concepts"), ratio, k)?.matrix),
                None,
            ),
            FeatureMode::Frequency => (
                FeatureMatrix::Dense(concept_features_freq(counts, assignment.expect("concepts"), k)?.matrix),
                None,
            ),
            FeatureMode::BowNb => (FeatureMatrix::Sparse(bow_nb_features(counts, ratio)?), None),
            FeatureMode::Lsa => {
                let x = build_lsa_matrix(counts, ratio, self.config.lsa.raw_counts)?;
                match factors {
                    Some(f) => (FeatureMatrix::Dense(fold_in(f, &x)?), None),
                    None => {
                        let f = truncated_svd::<f64, _>(&x, k, &self.config.svd_config())?;
                        (FeatureMatrix::Dense(lsa_document_features(&f)), Some(f))
                    }
                }
            }
        })
    }

    /// Test features for `test`, inferring concepts of unseen n-grams from
    /// their nearest centroid. Returns the features, labels and number of
    /// unseen n-grams.
    pub fn test_features(&self, fitted: &Representation<E>, test: &[usize]) -> Result<(FeatureMatrix, Vec<i8>, usize)> {
        let encoded = self.encode(test);
        let labels = self.dataset.signs(test);
        match &fitted.concepts {
            Some(concepts) => {
                let base = concepts.vocabulary.len();
                let mut extended = concepts.vocabulary.clone();
                extended.extend_from_encoded(encoded.iter().map(Vec::as_slice));
                let unseen = extended.len() - base;
                let mut assignment = concepts.assignment.clone();
                if unseen > 0 {
                    let vectors = self.embed(&extended, base)?;
                    let extra = clustering::assign_all(vectors.view(), &concepts.centroids, self.config.kmeans.workers)?;
                    assignment.labels.extend(extra.labels);
                }
                let counts = count_encoded(encoded.iter().map(Vec::as_slice), &extended);
                let ratio = if fitted.ratio.len() < extended.len() {
                    fitted.ratio.padded(extended.len() - fitted.ratio.len())
                } else {
                    fitted.ratio.clone()
                };
                let (features, _) = self.featurize(&counts, &ratio, Some(&assignment), None)?;
                Ok((features, labels, unseen))
            }
            None => {
                let counts = count_encoded(encoded.iter().map(Vec::as_slice), &fitted.vocabulary);
                let (features, _) = self.featurize(&counts, &fitted.ratio, None, fitted.lsa.as_ref())?;
                Ok((features, labels, 0))
            }
        }
    }

    /// Accuracy of the fitted fold on `test`, the unseen n-gram count and
    /// the time spent building test representations.
    pub fn evaluate_fold(&self, fitted: &FittedFold<E>, test: &[usize]) -> Result<(f64, usize, f64)> {
        let t = Instant::now();
        let (features, labels, unseen) = self
            .test_features(&fitted.representation, test)
            .map_err(|e| e.in_stage("doc_repr"))?;
        let secs = t.elapsed().as_secs_f64();
        let predictions = fitted.model.predict_rows(&features).map_err(|e| e.in_stage("svm_train"))?;
        Ok((accuracy(&predictions, &labels)?, unseen, secs))
    }

    /// Folds of the run: stratified CV or the predefined split.
    pub fn folds(&self) -> Result<Vec<Fold>> {
        let all: Vec<usize> = (0..self.dataset.len()).collect();
        match self.config.folds() {
            0 => {
                let split = self
                    .dataset
                    .split
                    .as_ref()
                    .ok_or_else(|| Error::Config(format!("dataset {} has no predefined split; set folds ≥ 2", self.dataset.name)))?;
                Ok(vec![Fold {
                    train: split.train.clone(),
                    test: split.test.clone(),
                }])
            }
            k => kfold_split(&self.dataset.signs(&all), k, self.config.seed),
        }
    }
}

/// Content hash of a word-vector table.
pub fn fingerprint_vectors<E: Scalar>(wv: &WordVectors<E>) -> String {
    let mut f = Fingerprint::new("word-vectors");
    f.u64(wv.len() as u64).u64(wv.dim() as u64);
    for w in wv.dictionary().words() {
        f.str(w);
    }
    f.scalars(wv.matrix().iter().copied());
    f.hex()
}

/// Execution options of [`run_experiment`].
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Folds evaluated concurrently; 0 and 1 both mean sequential.
    pub jobs: usize,
    pub cache: Option<ArtifactCache>,
}

/// Runs one experiment end to end.
pub fn run_experiment<E: Scalar>(
    config: &ExperimentConfig,
    dataset: &Dataset,
    vectors: &WordVectors<E>,
    options: &RunOptions,
) -> Result<ExperimentReport> {
    config.validate()?;
    let start = Instant::now();
    let ctx = RunContext::new(config, dataset, vectors, options.cache.as_ref());
    let folds = ctx.folds()?;
    let mut times = StageTimes::default();
    let shared = if config.cluster_on_all && config.feature_mode.uses_clusters() {
        let (concepts, t) = ctx.shared_concepts()?;
        times.add(&t);
        Some(concepts)
    } else {
        None
    };

    let results = map_indices(folds.len(), options.jobs, |i| -> Result<(f64, usize, usize, StageTimes)> {
        let fold = &folds[i];
        let fitted = ctx.fit_fold(&fold.train, shared.as_ref())?;
        let (acc, unseen, test_secs) = ctx.evaluate_fold(&fitted, &fold.test)?;
        let mut t = fitted.times;
        t.doc_repr += test_secs;
        info!("{} fold {}/{}: accuracy {:.4}", config.label(), i + 1, folds.len(), acc);
        let r = &fitted.representation;
        let vocab = r.concepts.as_ref().map_or(r.vocabulary.len(), |c| c.vocabulary.len());
        Ok((acc, vocab, unseen, t))
    });

    let mut per_fold = Vec::with_capacity(folds.len());
    let mut vocabulary_sizes = Vec::new();
    let mut unseen_test_ngrams = Vec::new();
    for r in results {
        let (acc, vocab, unseen, t) = r?;
        per_fold.push(acc);
        vocabulary_sizes.push(vocab);
        unseen_test_ngrams.push(unseen);
        times.add(&t);
    }
    let accuracy = per_fold.iter().sum::<f64>() / per_fold.len() as f64;
    let values = [
        times.ngram_repr,
        times.kmeans,
        times.doc_repr,
        times.svm_train,
        start.elapsed().as_secs_f64(),
    ];
    let stage_times: BTreeMap<String, f64> = STAGES.iter().map(|s| s.to_string()).zip(values).collect();
    let mut echo = config.clone();
    echo.folds = Some(config.folds());
    Ok(ExperimentReport {
        dataset: dataset.name.clone(),
        accuracy,
        per_fold,
        stage_times,
        vocabulary_sizes,
        unseen_test_ngrams,
        config_echo: echo,
    })
}
