use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::corpus::{Dataset, Document, Label, NGramOrders, Split};
use crate::embeddings::WordVectors;
use crate::error::Error;

/// Reviews mixing sentiment words with neutral filler; word vectors place
/// positive words, negative words and filler in three separated regions.
fn toy(n_per_class: usize, seed: u64) -> (Dataset, WordVectors<f64>) {
    let pos = ["great", "superb", "lovely", "fun"];
    let neg = ["awful", "boring", "dull", "bad"];
    let filler = ["movie", "the", "plot", "actor", "scene", "film"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut docs = Vec::new();
    for i in 0..2 * n_per_class {
        let positive = i % 2 == 0;
        let mut tokens = Vec::new();
        for _ in 0..12 {
            let r: f64 = rng.random();
            let w = if r < 0.35 {
                let own = if positive { &pos } else { &neg };
                own[rng.random_range(0..4)]
            } else if r < 0.38 {
                let other = if positive { &neg } else { &pos };
                other[rng.random_range(0..4)]
            } else {
                filler[rng.random_range(0..filler.len())]
            };
            tokens.push(w.to_string());
        }
        if i == 3 {
            tokens.push("unseenword".into());
        }
        let label = if positive { Label::Positive } else { Label::Negative };
        docs.push(Document::from_tokens(format!("d{i}"), label, tokens));
    }
    let mut pairs: Vec<(&str, Vec<f64>)> = Vec::new();
    for (j, w) in pos.iter().enumerate() {
        pairs.push((w, vec![5.0 + j as f64 * 2.0, 0.0, 0.1]));
    }
    for (j, w) in neg.iter().enumerate() {
        pairs.push((w, vec![-5.0 - j as f64 * 2.0, 0.0, -0.1]));
    }
    for (j, w) in filler.iter().enumerate() {
        pairs.push((w, vec![0.0, 5.0 + j as f64 * 0.1, 0.0]));
    }
    pairs.push(("unseenword", vec![0.2, 4.8, 0.0]));
    (Dataset::new("toy", docs).unwrap(), WordVectors::from_pairs(pairs).unwrap())
}

fn config(mode: FeatureMode, k: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(DatasetKind::Polarity);
    c.feature_mode = mode;
    c.k = k;
    c.folds = Some(4);
    c.ngram_orders = NGramOrders::new([1, 2]).unwrap();
    c
}

#[test]
fn every_mode_learns_the_toy_task() {
    let (ds, wv) = toy(40, 1);
    for (mode, k) in [
        (FeatureMode::NbMax, 8),
        (FeatureMode::Frequency, 3),
        (FeatureMode::BowNb, 3),
        (FeatureMode::Lsa, 3),
    ] {
        let mut c = config(mode, k);
        if mode == FeatureMode::Lsa {
            c.ngram_orders = NGramOrders::UNIGRAMS;
        }
        let r = run_experiment(&c, &ds, &wv, &RunOptions::default()).unwrap();
        assert_eq!(r.per_fold.len(), 4);
        let mean = r.per_fold.iter().sum::<f64>() / 4.0;
        assert_eq!(r.accuracy, mean);
        assert!(r.accuracy > 0.8, "{mode:?}: {}", r.accuracy);
        for s in STAGES {
            assert!(r.stage_time(s) >= 0.0);
        }
    }
}

#[test]
fn identical_runs_are_identical_except_timings() {
    let (ds, wv) = toy(30, 2);
    let c = config(FeatureMode::NbMax, 4);
    let a = run_experiment(&c, &ds, &wv, &RunOptions::default()).unwrap();
    let b = run_experiment(&c, &ds, &wv, &RunOptions { jobs: 3, cache: None }).unwrap();
    assert_eq!(a.without_timings(), b.without_timings());
}

#[test]
fn cached_run_matches_uncached_run() {
    let (ds, wv) = toy(30, 3);
    let dir = tempfile::tempdir().unwrap();
    let cache = ArtifactCache::new(dir.path()).unwrap();
    let c = config(FeatureMode::NbMax, 4);
    let plain = run_experiment(&c, &ds, &wv, &RunOptions::default()).unwrap();
    let opts = RunOptions {
        jobs: 1,
        cache: Some(cache),
    };
    let first = run_experiment(&c, &ds, &wv, &opts).unwrap();
    let files = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(files, 8, "4 centroid files and 4 models");
    let second = run_experiment(&c, &ds, &wv, &opts).unwrap();
    assert_eq!(plain.without_timings(), first.without_timings());
    assert_eq!(first.without_timings(), second.without_timings());
}

#[test]
fn too_many_clusters_fails_in_kmeans_stage() {
    let (ds, wv) = toy(10, 4);
    let c = config(FeatureMode::NbMax, 10_000);
    let err = run_experiment(&c, &ds, &wv, &RunOptions::default()).unwrap_err();
    assert_eq!(err.stage(), Some("kmeans"));
    assert!(matches!(err.root(), Error::TooFewPoints { k: 10_000, .. }));
}

#[test]
fn fitted_parameters_ignore_test_documents() {
    let (ds, wv) = toy(20, 5);
    let c = config(FeatureMode::NbMax, 3);
    let ctx = RunContext::new(&c, &ds, &wv, None);
    let fold = &ctx.folds().unwrap()[1];
    let full = ctx.fit_fold(&fold.train, None).unwrap();

    let train_only = ds.subset(&fold.train);
    let ctx2 = RunContext::new(&c, &train_only, &wv, None);
    let all: Vec<usize> = (0..train_only.len()).collect();
    let reduced = ctx2.fit_fold(&all, None).unwrap();

    assert_eq!(full.representation.ratio, reduced.representation.ratio);
    assert_eq!(full.model, reduced.model);
    let (a, b) = (full.representation.concepts.unwrap(), reduced.representation.concepts.unwrap());
    assert_eq!(a.centroids, b.centroids);
    assert_eq!(a.assignment, b.assignment);
}

#[test]
fn unseen_test_ngrams_take_the_nearest_centroid() {
    let (ds, wv) = toy(20, 6);
    let c = config(FeatureMode::Frequency, 3);
    let ctx = RunContext::new(&c, &ds, &wv, None);
    // document 3 holds the only "unseenword"; keep it out of training
    let train: Vec<usize> = (0..ds.len()).filter(|&i| i != 3).collect();
    let fitted = ctx.fit_fold(&train, None).unwrap();
    let (features, _, unseen) = ctx.test_features(&fitted.representation, &[3]).unwrap();
    assert!(unseen >= 1);
    let concepts = fitted.representation.concepts.as_ref().unwrap();
    let filler_cluster = crate::clustering::assign(&[0.0, 5.0, 0.0], &concepts.centroids).unwrap();
    let FeatureMatrix::Dense(f) = features else { panic!("dense") };
    // frequency features count every in-dictionary n-gram, unseen ones included
    let total: f64 = f.row(0).sum();
    let n_tokens = ds.documents[3].tokens.len() as f64;
    assert_eq!(total, n_tokens + (n_tokens - 1.0));
    assert!(f[[0, filler_cluster]] >= 1.0);
}

#[test]
fn predefined_split_is_used_when_folds_is_zero() {
    let (ds, wv) = toy(20, 7);
    let split = Split {
        train: (0..30).collect(),
        test: (30..40).collect(),
        unlabeled: vec![],
    };
    let ds = ds.with_split(split);
    let mut c = config(FeatureMode::NbMax, 3);
    c.dataset = DatasetKind::Imdb;
    c.folds = None;
    let r = run_experiment(&c, &ds, &wv, &RunOptions::default()).unwrap();
    assert_eq!(r.per_fold.len(), 1);
    assert_eq!(r.config_echo.folds, Some(0));
    let no_split = toy(5, 7).0;
    assert!(matches!(
        run_experiment(&c, &no_split, &wv, &RunOptions::default()),
        Err(Error::Config(_))
    ));
}

#[test]
fn cluster_on_all_clusters_once() {
    let (ds, wv) = toy(20, 8);
    let mut c = config(FeatureMode::NbMax, 3);
    c.cluster_on_all = true;
    let r = run_experiment(&c, &ds, &wv, &RunOptions::default()).unwrap();
    assert!(r.unseen_test_ngrams.iter().all(|&u| u == 0));
    assert!(r.vocabulary_sizes.windows(2).all(|w| w[0] == w[1]));
}
