use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const POS: [&str; 4] = ["great", "superb", "lovely", "fun"];
const NEG: [&str; 4] = ["awful", "boring", "dull", "bad"];
const FILLER: [&str; 6] = ["movie", "the", "plot", "actor", "scene", "film"];

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_conceptbag"));
    c.env_remove("CONCEPTBAG_SEED").env("RUST_LOG", "warn");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Small polarity layout plus matching 3-d word vectors.
struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("polarity");
        for (sub, own, other) in [("pos", POS, NEG), ("neg", NEG, POS)] {
            fs::create_dir_all(root.join(sub)).unwrap();
            for d in 0..12 {
                let words: Vec<&str> = (0..10)
                    .map(|i| match (d * 7 + i * 3) % 10 {
                        0..=3 => own[(d + i) % 4],
                        4 => other[(d * i) % 4],
                        j => FILLER[(j + d) % 6],
                    })
                    .collect();
                fs::write(root.join(sub).join(format!("cv{d:03}.txt")), words.join(" ")).unwrap();
            }
        }
        let mut vectors = String::from("14 3\n");
        for (j, w) in POS.iter().enumerate() {
            vectors += &format!("{w} {} 0 0.1\n", 5.0 + 2.0 * j as f64);
        }
        for (j, w) in NEG.iter().enumerate() {
            vectors += &format!("{w} {} 0 -0.1\n", -5.0 - 2.0 * j as f64);
        }
        for (j, w) in FILLER.iter().enumerate() {
            vectors += &format!("{w} 0 {} 0\n", 5.0 + 0.1 * j as f64);
        }
        fs::write(dir.path().join("vectors.txt"), vectors).unwrap();
        Self { dir }
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn s(&self, rel: &str) -> String {
        self.path(rel).to_str().unwrap().to_string()
    }

    fn data_args(&self) -> Vec<String> {
        vec![
            "--embeddings".into(),
            self.s("vectors.txt"),
            "--dataset-root".into(),
            self.s("polarity"),
        ]
    }

    fn write_config(&self, body: &str) -> PathBuf {
        let p = self.path("config.json");
        fs::write(&p, body).unwrap();
        p
    }
}

fn args<'a>(v: &'a [String], extra: &[&'a str]) -> Vec<&'a str> {
    v.iter().map(String::as_str).chain(extra.iter().copied()).collect()
}

#[test]
fn train_embeddings_writes_the_text_format() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    let line = "the cat sat on the mat while the dog sat on the log\n";
    fs::write(&corpus, line.repeat(50)).unwrap();
    let out = dir.path().join("v.txt");
    let o = run(&[
        "train-embeddings",
        "--corpus",
        corpus.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--dim",
        "100",
        "--min-count",
        "1",
        "--subsample",
        "1",
        "--epochs",
        "1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    let header: Vec<usize> = lines.next().unwrap().split(' ').map(|t| t.parse().unwrap()).collect();
    assert_eq!(header, vec![8, 100]);
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r.split(' ').count() == 101));
}

#[test]
fn train_embeddings_missing_corpus_names_the_path() {
    let o = run(&[
        "train-embeddings",
        "--corpus",
        "/no/such/corpus.txt",
        "--out",
        "/tmp/never-written.txt",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/no/such/corpus.txt"), "{}", stderr(&o));
}

#[test]
fn cluster_is_deterministic_and_reports_the_stage() {
    let f = Fixture::new();
    let data = f.data_args();
    let (a, b) = (f.s("a.bin"), f.s("b.bin"));
    for out in [&a, &b] {
        let mut full = vec!["cluster"];
        full.extend(args(&data, &["-k", "3", "--orders", "1+2", "--seed", "5", "--out", out]));
        let o = run(&full);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let bytes = fs::read(&a).unwrap();
    assert_eq!(&bytes[..8], b"CBAGCENT");

    let mut full = vec!["cluster"];
    full.extend(args(&data, &["-k", "5000", "--out", &a]));
    let o = run(&full);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("kmeans"), "{}", stderr(&o));
}

#[test]
fn featurize_train_and_evaluate_chain() {
    let f = Fixture::new();
    let data = f.data_args();
    let (cent, feats, model) = (f.s("c.bin"), f.s("train.svm"), f.s("model.txt"));
    let mut c = vec!["cluster"];
    c.extend(args(&data, &["-k", "4", "--out", &cent]));
    assert!(run(&c).status.success());
    let mut fz = vec!["featurize"];
    fz.extend(args(&data, &["--centroids", &cent, "--out", &feats]));
    let o = run(&fz);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&feats).unwrap();
    assert_eq!(text.lines().count(), 24);
    assert!(text.lines().all(|l| l.starts_with("+1") || l.starts_with("-1")));

    let o = run(&["train-svm", "--features", &feats, "--out", &model, "-C", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(&["evaluate", "--model", &model, "--features", &feats, "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["documents"], 24);
    assert!(v["accuracy"].as_f64().unwrap() > 0.9);

    let mut fz = vec!["featurize"];
    fz.extend(args(&data, &["--mode", "frequency", "--out", &feats]));
    let o = run(&fz);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--centroids"));

    let mut bow = vec!["featurize"];
    bow.extend(args(&data, &["--mode", "bow-nb", "--out", &feats]));
    assert!(run(&bow).status.success());
}

#[test]
fn inspect_cluster_prints_each_centroid() {
    let f = Fixture::new();
    let data = f.data_args();
    let cent = f.s("c.bin");
    let mut c = vec!["cluster"];
    c.extend(args(&data, &["-k", "3", "--out", &cent]));
    assert!(run(&c).status.success());
    let mut i = vec!["inspect-cluster"];
    i.extend(args(&data, &["--centroids", &cent, "--top", "2"]));
    let o = run(&i);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    assert_eq!(out.lines().count(), 3);
    assert!(out.lines().all(|l| l.starts_with("cluster ")));
    let mut bad = vec!["inspect-cluster"];
    bad.extend(args(&data, &["--centroids", &cent, "--clusters", "7"]));
    assert_eq!(run(&bad).status.code(), Some(1));
}

fn config_body(f: &Fixture, experiments: &str) -> String {
    format!(
        r#"{{"version": 1, "embeddings_path": "vectors.txt", "dataset_root": "polarity", "output_dir": "{}", {experiments}}}"#,
        f.s("out")
    )
}

#[test]
fn run_rejects_empty_and_malformed_configs() {
    let f = Fixture::new();
    let p = f.write_config(&config_body(&f, r#""experiments": []"#));
    let o = run(&["run", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no experiments"));

    let p = f.write_config(&config_body(&f, r#""experiments": [{"dataset": "polarity", "K": 3, "colour": 1}]"#));
    let o = run(&["run", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("colour"), "{}", stderr(&o));

    let p = f.write_config(
        r#"{"embeddings_path": "vectors.txt", "dataset_root": "polarity", "output_dir": "out", "experiments": [{"dataset": "polarity"}]}"#,
    );
    let o = run(&["run", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("version"));

    let p = f.write_config(&config_body(&f, r#""experiments": [{"dataset": "imdb"}]"#).replace("\"polarity\"", "\"nowhere\""));
    let o = run(&["run", "--dry-run", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nowhere"));
}

#[test]
fn dry_run_validates_without_running() {
    let f = Fixture::new();
    let p = f.write_config(&config_body(
        &f,
        r#""grid": {"base": {"dataset": "polarity", "folds": 3}, "ngram_orders": [[1], [1, 2], [2], [3], [1, 2, 3]], "K": [2, 3, 4]}"#,
    ));
    let o = run(&["run", "--dry-run", p.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("15 experiments"));
    assert!(!f.path("out").exists());
}

#[test]
fn grid_run_writes_fifteen_csv_rows() {
    let f = Fixture::new();
    let p = f.write_config(&config_body(
        &f,
        r#""grid": {"base": {"dataset": "polarity", "folds": 3}, "ngram_orders": [[1], [1, 2], [2], [3], [1, 2, 3]], "K": [2, 3, 4]}"#,
    ));
    let o = run(&["run", "--jobs", "2", p.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(f.path("out/results.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 16);
    assert!(lines[0].starts_with("dataset,orders,K,mode,accuracy"));
    let json: Vec<PathBuf> = fs::read_dir(f.path("out"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    assert_eq!(json.len(), 15);
    assert!(f.path("out/cache").is_dir());
}

fn run_report(f: &Fixture, seed_env: Option<&str>) -> serde_json::Value {
    let p = f.write_config(&config_body(
        f,
        r#""experiments": [{"dataset": "polarity", "K": 3, "folds": 3, "seed": 11}]"#,
    ));
    let mut c = bin();
    c.args(["run", "--no-cache", p.to_str().unwrap()]);
    if let Some(s) = seed_env {
        c.env("CONCEPTBAG_SEED", s);
    }
    let o = c.output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let path = first_json(&f.path("out"));
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn first_json(dir: &Path) -> PathBuf {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    v.sort();
    v.remove(0)
}

#[test]
fn seed_env_var_overrides_config_seeds() {
    let f = Fixture::new();
    assert_eq!(run_report(&f, None)["config_echo"]["seed"], 11);
    assert_eq!(run_report(&f, Some("7"))["config_echo"]["seed"], 7);
}

#[test]
fn run_is_repeatable_apart_from_timings() {
    let f = Fixture::new();
    let mut a = run_report(&f, None);
    let mut b = run_report(&f, None);
    a.as_object_mut().unwrap().remove("stage_times");
    b.as_object_mut().unwrap().remove("stage_times");
    assert_eq!(a, b);
}

#[test]
fn failing_experiment_names_its_stage() {
    let f = Fixture::new();
    let p = f.write_config(&config_body(
        &f,
        r#""experiments": [{"dataset": "polarity", "K": 900, "folds": 3}]"#,
    ));
    let o = run(&["run", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("stage kmeans"), "{}", stderr(&o));
}

#[test]
fn help_lists_flags_and_unknown_flags_fail() {
    for (sub, flag) in [
        ("train-embeddings", "--min-count"),
        ("cluster", "--batch-size"),
        ("featurize", "--centroids"),
        ("train-svm", "--max-epochs"),
        ("evaluate", "--model"),
        ("run", "--dry-run"),
        ("inspect-cluster", "--top"),
    ] {
        let o = run(&[sub, "--help"]);
        assert!(o.status.success());
        assert!(String::from_utf8_lossy(&o.stdout).contains(flag), "{sub}");
        let o = run(&[sub, "--no-such-flag"]);
        assert!(!o.status.success());
    }
}
