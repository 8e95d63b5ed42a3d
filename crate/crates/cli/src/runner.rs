//! `run`: experiments from a JSON config file.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{anyhow, bail, ensure, Context, Result};
use log::info;
use serde::Deserialize;

use conceptbag::corpus::{Dataset, NGramOrders};
use conceptbag::eval::{
    run_experiment, write_csv, ArtifactCache, DatasetKind, ExperimentConfig, ExperimentReport, FeatureMode, RunOptions,
};

use crate::commands::{kind_name, load_dataset, load_vectors, seed_or_override, SEED_VAR};
use crate::RunArgs;

pub const CONFIG_VERSION: u32 = 1;

/// Config file layout. Relative paths are resolved against the directory of
/// the config file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    pub version: u32,
    pub embeddings_path: PathBuf,
    pub dataset_root: DatasetRoots,
    pub output_dir: PathBuf,
    /// Cache of centroids and models; `output_dir/cache` when absent.
    #[serde(default)]
    pub model_dir: Option<PathBuf>,
    #[serde(default)]
    pub experiments: Vec<ExperimentConfig>,
    #[serde(default)]
    pub grid: Option<Grid>,
}

/// One directory for every experiment, or one per dataset kind.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum DatasetRoots {
    One(PathBuf),
    PerKind(PerKindRoots),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerKindRoots {
    #[serde(default)]
    pub polarity: Option<PathBuf>,
    #[serde(default)]
    pub imdb: Option<PathBuf>,
}

impl DatasetRoots {
    fn get(&self, kind: DatasetKind) -> Option<&Path> {
        match (self, kind) {
            (DatasetRoots::One(p), _) => Some(p),
            (DatasetRoots::PerKind(r), DatasetKind::Polarity) => r.polarity.as_deref(),
            (DatasetRoots::PerKind(r), DatasetKind::Imdb) => r.imdb.as_deref(),
        }
    }

    fn resolve(&mut self, base: &Path) {
        match self {
            DatasetRoots::One(p) => *p = base.join(&*p),
            DatasetRoots::PerKind(r) => {
                for p in [&mut r.polarity, &mut r.imdb].into_iter().flatten() {
                    *p = base.join(&*p);
                }
            }
        }
    }
}

/// Cartesian product of n-gram orders, K values and feature modes applied
/// to a base experiment.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub base: ExperimentConfig,
    #[serde(default)]
    pub ngram_orders: Vec<NGramOrders>,
    #[serde(rename = "K", alias = "k", default)]
    pub k: Vec<usize>,
    #[serde(default)]
    pub feature_modes: Vec<FeatureMode>,
}

impl Grid {
    fn expand(&self) -> Vec<ExperimentConfig> {
        let orders = if self.ngram_orders.is_empty() {
            vec![self.base.ngram_orders]
        } else {
            self.ngram_orders.clone()
        };
        let ks = if self.k.is_empty() { vec![self.base.k] } else { self.k.clone() };
        let modes = if self.feature_modes.is_empty() {
            vec![self.base.feature_mode]
        } else {
            self.feature_modes.clone()
        };
        let mut out = Vec::new();
        for &o in &orders {
            for &k in &ks {
                for &m in &modes {
                    let mut c = self.base.clone();
                    c.ngram_orders = o;
                    c.k = k;
                    c.feature_mode = m;
                    out.push(c);
                }
            }
        }
        out
    }
}

/// Parsed and validated config: every path checked, every experiment valid.
#[derive(Debug)]
pub struct Plan {
    pub embeddings_path: PathBuf,
    pub dataset_root: DatasetRoots,
    pub output_dir: PathBuf,
    pub model_dir: PathBuf,
    pub experiments: Vec<ExperimentConfig>,
}

pub fn load_plan(path: &Path) -> Result<Plan> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let file: RunFile = serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    ensure!(
        file.version == CONFIG_VERSION,
        "config {}: unsupported version {}, expected {CONFIG_VERSION}",
        path.display(),
        file.version
    );
    let base = path.parent().unwrap_or(Path::new("."));
    let mut experiments = file.experiments;
    if let Some(grid) = &file.grid {
        experiments.extend(grid.expand());
    }
    if experiments.is_empty() {
        bail!("no experiments in {}", path.display());
    }
    let seed = std::env::var(SEED_VAR).is_ok().then(|| seed_or_override(0)).transpose()?;
    for (i, e) in experiments.iter_mut().enumerate() {
        if let Some(s) = seed {
            e.seed = s;
        }
        e.validate().with_context(|| format!("experiment {} ({})", i + 1, e.label()))?;
    }

    let mut roots = file.dataset_root;
    roots.resolve(base);
    let embeddings_path = base.join(file.embeddings_path);
    let output_dir = base.join(file.output_dir);
    let model_dir = file.model_dir.map_or_else(|| output_dir.join("cache"), |p| base.join(p));

    ensure!(
        embeddings_path.is_file(),
        "embeddings file {} does not exist",
        embeddings_path.display()
    );
    for e in &experiments {
        let root = roots
            .get(e.dataset)
            .ok_or_else(|| anyhow!("no dataset_root given for {} experiments", kind_name(e.dataset)))?;
        ensure!(root.is_dir(), "dataset root {} is not a directory", root.display());
    }
    for dir in [&output_dir, &model_dir] {
        ensure!(!dir.is_file(), "{} exists and is not a directory", dir.display());
    }
    Ok(Plan {
        embeddings_path,
        dataset_root: roots,
        output_dir,
        model_dir,
        experiments,
    })
}

fn file_stem(i: usize, label: &str) -> String {
    let slug: String = label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '+' || c == '-' || c == '_' || c == '=' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{:03}-{slug}", i + 1)
}

pub fn run(a: RunArgs) -> Result<()> {
    let plan = load_plan(&a.config)?;
    if a.dry_run {
        for (i, e) in plan.experiments.iter().enumerate() {
            println!("{:3}  {}  {}", i + 1, kind_name(e.dataset), e.label());
        }
        println!("config ok: {} experiments", plan.experiments.len());
        return Ok(());
    }

    let vectors = load_vectors(&plan.embeddings_path)?;
    let mut datasets: HashMap<&'static str, Dataset> = HashMap::new();
    for e in &plan.experiments {
        let name = kind_name(e.dataset);
        if !datasets.contains_key(name) {
            let root = plan.dataset_root.get(e.dataset).expect("checked by load_plan");
            let ds = load_dataset(e.dataset, root)?;
            info!("{name}: {} documents", ds.len());
            datasets.insert(name, ds);
        }
    }
    fs::create_dir_all(&plan.output_dir).with_context(|| format!("creating {}", plan.output_dir.display()))?;
    let cache = if a.no_cache {
        None
    } else {
        Some(ArtifactCache::new(&plan.model_dir).with_context(|| format!("creating cache {}", plan.model_dir.display()))?)
    };
    let options = RunOptions { jobs: 1, cache };

    let n = plan.experiments.len();
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<conceptbag::Result<ExperimentReport>>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..a.jobs.clamp(1, n) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let e = &plan.experiments[i];
                info!("[{}/{n}] {}", i + 1, e.label());
                let r = run_experiment(e, &datasets[kind_name(e.dataset)], &vectors, &options);
                if let Ok(rep) = &r {
                    info!("[{}/{n}] {} accuracy {:.2}%", i + 1, e.label(), 100.0 * rep.accuracy);
                }
                slots.lock().expect("result slots")[i] = Some(r);
            });
        }
    });

    let mut reports = Vec::new();
    let mut first_error = None;
    for (i, r) in slots.into_inner().expect("result slots").into_iter().enumerate() {
        let label = plan.experiments[i].label();
        match r.expect("every experiment ran") {
            Ok(rep) => {
                let path = plan.output_dir.join(format!("{}.json", file_stem(i, &label)));
                rep.write_json(BufWriter::new(
                    File::create(&path).with_context(|| format!("creating {}", path.display()))?,
                ))?;
                reports.push(rep);
            }
            Err(e) if first_error.is_none() => first_error = Some(anyhow::Error::new(e).context(format!("experiment {} ({label})", i + 1))),
            Err(_) => {}
        }
    }
    if !reports.is_empty() {
        let path = plan.output_dir.join("results.csv");
        write_csv(
            File::create(&path).with_context(|| format!("creating {}", path.display()))?,
            &reports,
        )?;
        info!("wrote {} rows to {}", reports.len(), path.display());
    }
    match first_error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
