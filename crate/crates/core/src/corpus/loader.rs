//! Loaders for the two on-disk review layouts.
//!
//! Polarity: `root/{pos,neg}/*`. IMDB: `root/train/{pos,neg,unsup}/*` and
//! `root/test/{pos,neg}/*`, with `unsup` optional. Files are read in
//! lexicographic order so document order is reproducible.

use std::fs;
use std::path::{Path, PathBuf};

use log::warn;

use super::{tokenize::decode_lossy, Dataset, Document, Label, Split};
use crate::error::{Error, Result};

fn list_files(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(Error::MissingDirectory(dir.to_path_buf()));
    }
    let entries = fs::read_dir(dir).map_err(|source| Error::UnreadableFile {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| Error::UnreadableFile {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        let hidden = path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with('.'));
        if path.is_file() && !hidden {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn read_documents(root: &Path, relative: &str, label: Label) -> Result<Vec<Document>> {
    list_files(&root.join(relative))?
        .into_iter()
        .map(|path| {
            let bytes = fs::read(&path).map_err(|source| Error::UnreadableFile {
                path: path.clone(),
                source,
            })?;
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            Ok(Document::from_text(format!("{relative}/{name}"), label, &decode_lossy(&bytes)))
        })
        .collect()
}

/// Loads a `pos/` + `neg/` review collection; labels are +1 and -1.
pub fn load_polarity_dataset(root: impl AsRef<Path>) -> Result<Dataset> {
    let root = root.as_ref();
    for sub in ["pos", "neg"] {
        if !root.join(sub).is_dir() {
            return Err(Error::MissingDirectory(root.join(sub)));
        }
    }
    let mut documents = read_documents(root, "pos", Label::Positive)?;
    documents.extend(read_documents(root, "neg", Label::Negative)?);
    let name = root.file_name().and_then(|n| n.to_str()).unwrap_or("polarity").to_string();
    let dataset = Dataset::new(name, documents)?;
    if !dataset.is_balanced() {
        warn!(
            "{}: {} positive vs {} negative reviews",
            root.display(),
            dataset.count_label(Label::Positive),
            dataset.count_label(Label::Negative)
        );
    }
    Ok(dataset)
}

/// Loads the IMDB layout with its predefined train/test/unlabeled split.
pub fn load_imdb_dataset(root: impl AsRef<Path>) -> Result<Dataset> {
    let root = root.as_ref();
    for sub in ["train/pos", "train/neg", "test/pos", "test/neg"] {
        if !root.join(sub).is_dir() {
            return Err(Error::MissingDirectory(root.join(sub)));
        }
    }
    let mut documents = Vec::new();
    let mut split = Split::default();
    let mut append = |docs: Vec<Document>, part: &mut Vec<usize>| {
        for d in docs {
            part.push(documents.len());
            documents.push(d);
        }
    };
    append(read_documents(root, "train/pos", Label::Positive)?, &mut split.train);
    append(read_documents(root, "train/neg", Label::Negative)?, &mut split.train);
    append(read_documents(root, "test/pos", Label::Positive)?, &mut split.test);
    append(read_documents(root, "test/neg", Label::Negative)?, &mut split.test);
    if root.join("train/unsup").is_dir() {
        append(read_documents(root, "train/unsup", Label::Unlabeled)?, &mut split.unlabeled);
    } else {
        warn!("{}: no train/unsup directory, unlabeled partition is empty", root.display());
    }
    let name = root.file_name().and_then(|n| n.to_str()).unwrap_or("imdb").to_string();
    Ok(Dataset::new(name, documents)?.with_split(split))
}
