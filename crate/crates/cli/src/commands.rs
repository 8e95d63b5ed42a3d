use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use log::info;

use conceptbag::clustering::{self, Centroids, KMeansConfig};
use conceptbag::corpus::{load_imdb_dataset, load_polarity_dataset, tokenize, Dataset};
use conceptbag::embeddings::{embed_keys, load_word_vectors, train_sgns_corpus, SgnsConfig, SgnsCorpus, WordVectors};
use conceptbag::eval::{DatasetKind, ExperimentConfig, FeatureMatrix, RunContext, StageTimes};
use conceptbag::features::{dense_to_csr, read_svmlight, write_svmlight};
use conceptbag::scalar::squared_distance;
use conceptbag::svm::{svm_train, LinearModel, SvmConfig};

use crate::{ClusterArgs, DataArgs, EvaluateArgs, FeaturizeArgs, InspectArgs, SplitArg, TrainEmbeddingsArgs, TrainSvmArgs};

pub const SEED_VAR: &str = "CONCEPTBAG_SEED";

/// `CONCEPTBAG_SEED` when set, otherwise `seed`.
pub fn seed_or_override(seed: u64) -> Result<u64> {
    match std::env::var(SEED_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("{SEED_VAR}={v:?} is not an unsigned integer")),
        Err(_) => Ok(seed),
    }
}

pub fn load_dataset(kind: DatasetKind, root: &Path) -> Result<Dataset> {
    let ds = match kind {
        DatasetKind::Polarity => load_polarity_dataset(root),
        DatasetKind::Imdb => load_imdb_dataset(root),
    };
    ds.with_context(|| format!("loading {} dataset from {}", kind_name(kind), root.display()))
}

pub fn kind_name(kind: DatasetKind) -> &'static str {
    match kind {
        DatasetKind::Polarity => "polarity",
        DatasetKind::Imdb => "imdb",
    }
}

pub fn load_vectors(path: &Path) -> Result<WordVectors<f64>> {
    let wv = load_word_vectors(path, None).with_context(|| format!("loading word vectors from {}", path.display()))?;
    info!("{} word vectors of dimension {}", wv.len(), wv.dim());
    Ok(wv)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(f))
}

/// Training documents: the predefined training split, or every document.
fn training_indices(ds: &Dataset) -> Vec<usize> {
    match &ds.split {
        Some(s) => s.train.clone(),
        None => (0..ds.len()).collect(),
    }
}

struct Loaded {
    config: ExperimentConfig,
    dataset: Dataset,
    vectors: WordVectors<f64>,
}

fn load_data(data: &DataArgs) -> Result<Loaded> {
    let kind: DatasetKind = data.dataset.into();
    let mut config = ExperimentConfig::new(kind);
    config.ngram_orders = data.orders;
    Ok(Loaded {
        dataset: load_dataset(kind, &data.dataset_root)?,
        vectors: load_vectors(&data.embeddings)?,
        config,
    })
}

pub fn train_embeddings(a: TrainEmbeddingsArgs) -> Result<()> {
    let config = SgnsConfig {
        dim: a.dim,
        window: a.window,
        negatives: a.negatives,
        subsample_threshold: a.subsample,
        learning_rate: a.learning_rate,
        epochs: a.epochs,
        min_count: a.min_count,
        seed: seed_or_override(a.seed)?,
        workers: a.workers,
    };
    config.validate()?;
    let mut corpus = SgnsCorpus::new();
    let reader = open(&a.corpus).with_context(|| format!("reading corpus {}", a.corpus.display()))?;
    for line in reader.lines() {
        let line = line.with_context(|| format!("reading corpus {}", a.corpus.display()))?;
        let tokens = tokenize(&line);
        if !tokens.is_empty() {
            corpus.push_document(&tokens);
        }
    }
    info!("corpus: {} documents, {} tokens", corpus.n_documents(), corpus.n_tokens());
    let wv: WordVectors<f32> = train_sgns_corpus(&corpus, &config).with_context(|| format!("training on {}", a.corpus.display()))?;
    wv.write_text(create(&a.out)?)?;
    info!("wrote {} vectors to {}", wv.len(), a.out.display());
    Ok(())
}

pub fn cluster(a: ClusterArgs) -> Result<()> {
    let Loaded {
        mut config,
        dataset,
        vectors,
    } = load_data(&a.data)?;
    config.k = a.k;
    config.seed = seed_or_override(a.seed)?;
    config.kmeans.iterations = a.iterations;
    config.kmeans.variant = a.variant.into();
    config.kmeans.batch_size = a.batch_size;
    config.kmeans.init = a.init.into();
    config.kmeans.workers = a.workers;
    let kconf: KMeansConfig = config.kmeans_config();
    kconf.validate()?;

    let ctx = RunContext::new(&config, &dataset, &vectors, None);
    let vocab = ctx.vocabulary(&training_indices(&dataset)).map_err(|e| e.in_stage("ngram_repr"))?;
    let table = embed_keys(&vocab, vocab.keys(), &vectors).map_err(|e| e.in_stage("ngram_repr"))?;
    info!("clustering {} n-grams into {} concepts", vocab.len(), kconf.k);
    let fit = clustering::fit(table.view(), &kconf).map_err(|e| e.in_stage("kmeans"))?;
    info!("inertia {:.6}", fit.inertia());
    let mut out = create(&a.out)?;
    if a.text {
        fit.centroids.write_text(&mut out)?;
    } else {
        fit.centroids.write_binary(&mut out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn featurize(a: FeaturizeArgs) -> Result<()> {
    let Loaded {
        mut config,
        dataset,
        vectors,
    } = load_data(&a.data)?;
    config.feature_mode = a.mode.into();
    config.k = a.k;
    config.seed = seed_or_override(a.seed)?;
    let centroids = match (config.feature_mode.uses_clusters(), &a.centroids) {
        (true, Some(path)) => {
            let c = Centroids::<f64>::load(path).with_context(|| format!("loading centroids {}", path.display()))?;
            config.k = c.k();
            Some(c)
        }
        (true, None) => bail!("--centroids is required with --mode {:?}", a.mode),
        (false, _) => None,
    };
    config.validate()?;

    let ctx = RunContext::new(&config, &dataset, &vectors, None);
    let train = training_indices(&dataset);
    let shared = match centroids {
        Some(c) => {
            let vocab = ctx.vocabulary(&train).map_err(|e| e.in_stage("ngram_repr"))?;
            Some(ctx.concepts_from(vocab, c)?)
        }
        None => None,
    };
    let mut times = StageTimes::default();
    let (repr, train_features, train_labels) = ctx.fit_representation(&train, shared.as_ref(), &mut times)?;
    let (features, labels) = match a.split {
        SplitArg::Train => (train_features, train_labels),
        SplitArg::Test => {
            let Some(split) = &dataset.split else {
                bail!("dataset at {} has no predefined test split", a.data.dataset_root.display());
            };
            let (f, l, unseen) = ctx.test_features(&repr, &split.test).map_err(|e| e.in_stage("doc_repr"))?;
            info!("{unseen} test n-grams unseen in training");
            (f, l)
        }
    };
    let csr = match features {
        FeatureMatrix::Dense(m) => dense_to_csr(&m),
        FeatureMatrix::Sparse(m) => m,
    };
    let mut out = create(&a.out)?;
    write_svmlight(&mut out, &csr, &labels)?;
    out.flush()?;
    info!(
        "wrote {} documents × {} features to {}",
        csr.n_rows(),
        csr.n_cols(),
        a.out.display()
    );
    Ok(())
}

pub fn train_svm(a: TrainSvmArgs) -> Result<()> {
    let config = SvmConfig {
        c: a.c,
        max_epochs: a.max_epochs,
        tolerance: a.tolerance,
        seed: seed_or_override(a.seed)?,
    };
    config.validate()?;
    let (x, y) = read_svmlight::<f64, _>(open(&a.features)?, None).with_context(|| format!("reading {}", a.features.display()))?;
    let model = svm_train(&x, &y, &config).map_err(|e| e.in_stage("svm_train"))?;
    let mut out = create(&a.out)?;
    model.write_text(&mut out)?;
    out.flush()?;
    Ok(())
}

pub fn evaluate(a: EvaluateArgs) -> Result<()> {
    let model = LinearModel::<f64>::load(&a.model).with_context(|| format!("loading model {}", a.model.display()))?;
    let (x, y) =
        read_svmlight::<f64, _>(open(&a.features)?, Some(model.dim())).with_context(|| format!("reading {}", a.features.display()))?;
    let predictions = model.predict_rows(&x)?;
    let correct = predictions.iter().zip(&y).filter(|(p, t)| p == t).count();
    let accuracy = conceptbag::eval::accuracy(&predictions, &y)?;
    if a.json {
        let v = serde_json::json!({ "accuracy": accuracy, "correct": correct, "documents": y.len() });
        println!("{v}");
    } else {
        println!("accuracy {accuracy:.4} ({correct}/{})", y.len());
    }
    Ok(())
}

pub fn inspect_cluster(a: InspectArgs) -> Result<()> {
    let Loaded { config, dataset, vectors } = load_data(&a.data)?;
    let centroids = Centroids::<f64>::load(&a.centroids).with_context(|| format!("loading centroids {}", a.centroids.display()))?;
    if let Some(&bad) = a.clusters.iter().find(|&&k| k >= centroids.k()) {
        bail!("cluster {bad} out of range, the file holds {}", centroids.k());
    }
    let ctx = RunContext::new(&config, &dataset, &vectors, None);
    let vocab = ctx.vocabulary(&training_indices(&dataset)).map_err(|e| e.in_stage("ngram_repr"))?;
    let concepts = ctx.concepts_from(vocab, centroids)?;
    let table = embed_keys(&concepts.vocabulary, concepts.vocabulary.keys(), &vectors)?;
    let members = concepts.assignment.members(concepts.centroids.k());
    let wanted: Vec<usize> = if a.clusters.is_empty() {
        (0..concepts.centroids.k()).collect()
    } else {
        a.clusters.clone()
    };

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for k in wanted {
        let center = concepts.centroids.row(k);
        let mut ranked: Vec<(f64, usize)> = members[k]
            .iter()
            .map(|&t| (squared_distance(table.row(t).as_slice().expect("standard layout"), center), t))
            .collect();
        ranked.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let shown: Vec<String> = ranked
            .iter()
            .take(a.top)
            .map(|&(_, t)| concepts.vocabulary.ngram(t).to_string())
            .collect();
        writeln!(out, "cluster {k} ({} n-grams): {}", members[k].len(), shown.join(" | "))?;
    }
    Ok(())
}
