//! Skip-gram with negative sampling, sized for toy and mid-size corpora.
//!
//! Each (center, context) pair inside a symmetric window contributes the loss
//!
//! ```text
//! -log σ(u_ctx · v_center) - Σ_neg log σ(-u_neg · v_center)
//! ```
//!
//! where `v` are input vectors (returned) and `u` output vectors. Negatives
//! are drawn from the unigram distribution raised to 0.75; frequent words are
//! discarded with probability `1 - sqrt(t / f(w))`; the learning rate is fixed.
//!
//! With `workers > 1` each epoch's documents are split into contiguous shards
//! trained independently from the same starting parameters, and the shard
//! results are averaged. This is deterministic for a fixed worker count but
//! differs from the single-worker trajectory.

use std::collections::HashMap;

use ndarray::Array2;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::WordVectors;
use crate::corpus::Dictionary;
use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SgnsConfig {
    pub dim: usize,
    /// Context words on each side of the center.
    pub window: usize,
    pub negatives: usize,
    pub subsample_threshold: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub min_count: u64,
    pub seed: u64,
    pub workers: usize,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        Self {
            dim: 100,
            window: 5,
            negatives: 5,
            subsample_threshold: 1e-5,
            learning_rate: 0.01,
            epochs: 5,
            min_count: 100,
            seed: 1,
            workers: 1,
        }
    }
}

impl SgnsConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dim", self.dim),
            ("window", self.window),
            ("negatives", self.negatives),
            ("min_count", self.min_count as usize),
            ("workers", self.workers),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if !(self.subsample_threshold > 0.0) || !(self.learning_rate > 0.0) {
            return Err(Error::Config("subsample_threshold and learning_rate must be > 0".into()));
        }
        Ok(())
    }
}

/// Token-id corpus with raw word frequencies.
#[derive(Debug, Clone, Default)]
pub struct SgnsCorpus {
    dictionary: Dictionary,
    counts: Vec<u64>,
    documents: Vec<Vec<u32>>,
}

impl SgnsCorpus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_document<S: AsRef<str>>(&mut self, tokens: &[S]) {
        let doc = tokens
            .iter()
            .map(|t| {
                let id = self.dictionary.insert(t.as_ref());
                if id as usize == self.counts.len() {
                    self.counts.push(0);
                }
                self.counts[id as usize] += 1;
                id
            })
            .collect();
        self.documents.push(doc);
    }

    pub fn n_tokens(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn n_documents(&self) -> usize {
        self.documents.len()
    }
}

impl<S: AsRef<str>> FromIterator<Vec<S>> for SgnsCorpus {
    fn from_iter<I: IntoIterator<Item = Vec<S>>>(iter: I) -> Self {
        let mut c = SgnsCorpus::new();
        for doc in iter {
            c.push_document(&doc);
        }
        c
    }
}

#[inline]
fn sigmoid<T: Scalar>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

/// Negative-sampling loss of one (center, context, negatives) triple.
pub fn sgns_loss<T: Scalar>(center: &[T], context: &[T], negatives: &[&[T]]) -> T {
    let mut loss = -sigmoid(scalar::dot(context, center)).ln();
    for neg in negatives {
        loss -= sigmoid(-scalar::dot(neg, center)).ln();
    }
    loss
}

/// Gradients of [`sgns_loss`] with respect to each argument.
#[derive(Debug, Clone, PartialEq)]
pub struct SgnsGradients<T> {
    pub center: Vec<T>,
    pub context: Vec<T>,
    pub negatives: Vec<Vec<T>>,
}

pub fn sgns_gradients<T: Scalar>(center: &[T], context: &[T], negatives: &[&[T]]) -> SgnsGradients<T> {
    let mut g_center = vec![T::zero(); center.len()];
    // d/dx of -log σ(x) is σ(x) - 1; of -log σ(-x) it is σ(x).
    let coeff = sigmoid(scalar::dot(context, center)) - T::one();
    scalar::axpy(coeff, context, &mut g_center);
    let g_context = center.iter().map(|&c| coeff * c).collect();
    let g_negatives = negatives
        .iter()
        .map(|neg| {
            let s = sigmoid(scalar::dot(neg, center));
            scalar::axpy(s, neg, &mut g_center);
            center.iter().map(|&c| s * c).collect()
        })
        .collect();
    SgnsGradients {
        center: g_center,
        context: g_context,
        negatives: g_negatives,
    }
}

/// One SGD step on a (center, target) group: `targets[0]` is the observed
/// context, the rest are negatives. Output rows are updated with the center
/// vector from before the step; the center is updated once at the end.
#[inline]
fn sgd_step<T: Scalar>(input: &mut [T], output: &mut [T], dim: usize, center: usize, targets: &[usize], lr: T, scratch: &mut [T]) {
    scratch.fill(T::zero());
    let v = &input[center * dim..(center + 1) * dim];
    for (i, &t) in targets.iter().enumerate() {
        let u = &mut output[t * dim..(t + 1) * dim];
        let label = if i == 0 { T::one() } else { T::zero() };
        let g = lr * (label - sigmoid(scalar::dot(u, v)));
        scalar::axpy(g, u, scratch);
        scalar::axpy(g, v, u);
    }
    scalar::axpy(T::one(), scratch, &mut input[center * dim..(center + 1) * dim]);
}

struct Model<T> {
    input: Vec<T>,
    output: Vec<T>,
}

struct Prepared {
    documents: Vec<Vec<u32>>,
    keep_probability: Vec<f64>,
    noise: WeightedIndex<f64>,
    dictionary: Dictionary,
}

fn prepare(corpus: &SgnsCorpus, config: &SgnsConfig) -> Result<Prepared> {
    let mut survivors: Vec<u32> = (0..corpus.counts.len() as u32)
        .filter(|&id| corpus.counts[id as usize] >= config.min_count)
        .collect();
    if survivors.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    // Most frequent first; ties keep first-occurrence order.
    survivors.sort_by_key(|&id| (std::cmp::Reverse(corpus.counts[id as usize]), id));
    let remap: HashMap<u32, u32> = survivors.iter().enumerate().map(|(new, &old)| (old, new as u32)).collect();
    let dictionary: Dictionary = survivors.iter().map(|&id| corpus.dictionary.word(id)).collect();
    let counts: Vec<u64> = survivors.iter().map(|&id| corpus.counts[id as usize]).collect();
    let total: u64 = counts.iter().sum();
    let keep_probability = counts
        .iter()
        .map(|&c| {
            let f = c as f64 / total as f64;
            (config.subsample_threshold / f).sqrt().min(1.0)
        })
        .collect();
    let noise = WeightedIndex::new(counts.iter().map(|&c| (c as f64).powf(0.75))).expect("positive weights");
    let documents = corpus
        .documents
        .iter()
        .map(|d| d.iter().filter_map(|id| remap.get(id).copied()).collect())
        .collect();
    Ok(Prepared {
        documents,
        keep_probability,
        noise,
        dictionary,
    })
}

fn train_shard<T: Scalar>(model: &mut Model<T>, prepared: &Prepared, documents: &[Vec<u32>], config: &SgnsConfig, rng: &mut ChaCha8Rng) {
    let dim = config.dim;
    let lr = T::lit(config.learning_rate);
    let mut scratch = vec![T::zero(); dim];
    let mut sentence: Vec<u32> = Vec::new();
    let mut targets: Vec<usize> = Vec::with_capacity(config.negatives + 1);
    for doc in documents {
        sentence.clear();
        sentence.extend(doc.iter().copied().filter(|&w| {
            let keep = prepared.keep_probability[w as usize];
            keep >= 1.0 || rng.random::<f64>() < keep
        }));
        for (pos, &center) in sentence.iter().enumerate() {
            let lo = pos.saturating_sub(config.window);
            let hi = (pos + config.window + 1).min(sentence.len());
            for (ctx_pos, &context) in sentence.iter().enumerate().take(hi).skip(lo) {
                if ctx_pos == pos {
                    continue;
                }
                targets.clear();
                targets.push(context as usize);
                for _ in 0..config.negatives {
                    let neg = prepared.noise.sample(rng);
                    if neg != context as usize {
                        targets.push(neg);
                    }
                }
                sgd_step(
                    &mut model.input,
                    &mut model.output,
                    dim,
                    center as usize,
                    &targets,
                    lr,
                    &mut scratch,
                );
            }
        }
    }
}

/// Trains on tokenized documents.
pub fn train_sgns<T: Scalar, S: AsRef<str>>(documents: &[Vec<S>], config: &SgnsConfig) -> Result<WordVectors<T>> {
    let corpus: SgnsCorpus = documents
        .iter()
        .map(|d| d.iter().map(AsRef::as_ref).collect::<Vec<&str>>())
        .collect();
    train_sgns_corpus(&corpus, config)
}

/// Trains on a prepared corpus and returns the input vectors of every word
/// seen at least `min_count` times, most frequent first.
pub fn train_sgns_corpus<T: Scalar>(corpus: &SgnsCorpus, config: &SgnsConfig) -> Result<WordVectors<T>> {
    config.validate()?;
    let prepared = prepare(corpus, config)?;
    let vocab = prepared.dictionary.len();
    let dim = config.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let half = 0.5 / dim as f64;
    let mut model = Model {
        input: (0..vocab * dim).map(|_| T::lit(rng.random_range(-half..half))).collect(),
        output: vec![T::zero(); vocab * dim],
    };

    for epoch in 0..config.epochs {
        if config.workers == 1 {
            train_shard(&mut model, &prepared, &prepared.documents, config, &mut rng);
            continue;
        }
        let shard_len = prepared.documents.len().div_ceil(config.workers).max(1);
        let shards: Vec<&[Vec<u32>]> = prepared.documents.chunks(shard_len).collect();
        let results: Vec<Model<T>> = std::thread::scope(|scope| {
            let handles: Vec<_> = shards
                .iter()
                .enumerate()
                .map(|(w, shard)| {
                    let mut local = Model {
                        input: model.input.clone(),
                        output: model.output.clone(),
                    };
                    let prepared = &prepared;
                    let seed = config.seed ^ ((epoch as u64) << 32) ^ (w as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                    scope.spawn(move || {
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        train_shard(&mut local, prepared, shard, config, &mut rng);
                        local
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        let scale = T::one() / T::lit(results.len() as f64);
        for (dst, field) in [(&mut model.input, 0), (&mut model.output, 1)] {
            dst.fill(T::zero());
            for r in &results {
                let src = if field == 0 { &r.input } else { &r.output };
                scalar::axpy(scale, src, dst);
            }
        }
    }

    let matrix = Array2::from_shape_vec((vocab, dim), model.input).expect("vocab × dim");
    WordVectors::new(prepared.dictionary, matrix)
}
