mod commands;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use conceptbag::clustering::{Init, Variant};
use conceptbag::corpus::NGramOrders;
use conceptbag::eval::{DatasetKind, FeatureMode};

/// Bag-of-concepts sentiment pipeline.
#[derive(Parser, Debug)]
#[command(name = "conceptbag", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train skip-gram word vectors on a corpus with one document per line.
    TrainEmbeddings(TrainEmbeddingsArgs),
    /// Cluster the n-gram vectors of a dataset's training vocabulary.
    Cluster(ClusterArgs),
    /// Write document features in svmlight format.
    Featurize(FeaturizeArgs),
    /// Train a linear SVM on svmlight features.
    TrainSvm(TrainSvmArgs),
    /// Accuracy of a trained model on svmlight features.
    Evaluate(EvaluateArgs),
    /// Run the experiments of a JSON config file.
    Run(RunArgs),
    /// Print the n-grams closest to each centroid.
    InspectCluster(InspectArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum DatasetArg {
    Polarity,
    Imdb,
}

impl From<DatasetArg> for DatasetKind {
    fn from(d: DatasetArg) -> Self {
        match d {
            DatasetArg::Polarity => DatasetKind::Polarity,
            DatasetArg::Imdb => DatasetKind::Imdb,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum VariantArg {
    Lloyd,
    Minibatch,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Lloyd => Variant::Lloyd,
            VariantArg::Minibatch => Variant::Minibatch,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum InitArg {
    Kmeanspp,
    RandomPoints,
}

impl From<InitArg> for Init {
    fn from(v: InitArg) -> Self {
        match v {
            InitArg::Kmeanspp => Init::Kmeanspp,
            InitArg::RandomPoints => Init::RandomPoints,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, ValueEnum)]
enum ModeArg {
    NbMax,
    Frequency,
    BowNb,
    Lsa,
}

impl From<ModeArg> for FeatureMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::NbMax => FeatureMode::NbMax,
            ModeArg::Frequency => FeatureMode::Frequency,
            ModeArg::BowNb => FeatureMode::BowNb,
            ModeArg::Lsa => FeatureMode::Lsa,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, ValueEnum)]
enum SplitArg {
    Train,
    Test,
}

#[derive(Args, Debug)]
struct TrainEmbeddingsArgs {
    /// Text corpus, one document per line.
    #[arg(long)]
    corpus: PathBuf,
    /// Output file in the word2vec text format.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 100)]
    dim: usize,
    #[arg(long, default_value_t = 5)]
    window: usize,
    #[arg(long, default_value_t = 5)]
    negatives: usize,
    #[arg(long, default_value_t = 1e-5)]
    subsample: f64,
    #[arg(long, default_value_t = 0.01)]
    learning_rate: f64,
    #[arg(long, default_value_t = 5)]
    epochs: usize,
    /// Words seen fewer times are dropped.
    #[arg(long, default_value_t = 100)]
    min_count: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

/// Inputs shared by the commands that read a dataset through word vectors.
#[derive(Args, Debug)]
struct DataArgs {
    /// Word vectors in the word2vec text format.
    #[arg(long)]
    embeddings: PathBuf,
    /// Dataset directory.
    #[arg(long)]
    dataset_root: PathBuf,
    #[arg(long, value_enum, default_value = "polarity")]
    dataset: DatasetArg,
    /// N-gram orders, e.g. "1", "1+2" or "1,2,3".
    #[arg(long, default_value = "1")]
    orders: NGramOrders,
}

#[derive(Args, Debug)]
struct ClusterArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, short = 'k', default_value_t = 300)]
    k: usize,
    #[arg(long, default_value_t = 10)]
    iterations: usize,
    #[arg(long, value_enum, default_value = "lloyd")]
    variant: VariantArg,
    #[arg(long, default_value_t = 10_000)]
    batch_size: usize,
    #[arg(long, value_enum, default_value = "kmeanspp")]
    init: InitArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Centroid file.
    #[arg(long)]
    out: PathBuf,
    /// Write the text format instead of the binary one.
    #[arg(long)]
    text: bool,
}

#[derive(Args, Debug)]
struct FeaturizeArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum, default_value = "nb-max")]
    mode: ModeArg,
    /// Binary centroid file; required by the concept modes.
    #[arg(long)]
    centroids: Option<PathBuf>,
    /// Rank of the LSA representation.
    #[arg(long, short = 'k', default_value_t = 300)]
    k: usize,
    /// Documents to featurize. Everything is fit on the training portion;
    /// `test` needs a dataset with a predefined split.
    #[arg(long, value_enum, default_value = "train")]
    split: SplitArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// svmlight output.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TrainSvmArgs {
    /// svmlight training features.
    #[arg(long)]
    features: PathBuf,
    #[arg(long = "C", short = 'C', default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1000)]
    max_epochs: usize,
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Model output.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    /// svmlight test features.
    #[arg(long)]
    features: PathBuf,
    /// Print a JSON object instead of plain text.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// JSON experiment config.
    config: PathBuf,
    /// Validate the config and paths without running anything.
    #[arg(long)]
    dry_run: bool,
    /// Experiments run concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Do not read or write cached centroids and models.
    #[arg(long)]
    no_cache: bool,
}

#[derive(Args, Debug)]
struct InspectArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Binary centroid file.
    #[arg(long)]
    centroids: PathBuf,
    /// N-grams printed per centroid.
    #[arg(long, default_value_t = 10)]
    top: usize,
    /// Only these clusters; all when omitted.
    #[arg(long, value_delimiter = ',')]
    clusters: Vec<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::TrainEmbeddings(a) => commands::train_embeddings(a),
        Command::Cluster(a) => commands::cluster(a),
        Command::Featurize(a) => commands::featurize(a),
        Command::TrainSvm(a) => commands::train_svm(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Run(a) => runner::run(a),
        Command::InspectCluster(a) => commands::inspect_cluster(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
