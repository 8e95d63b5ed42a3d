//! Labeled review collections, tokenization, n-gram extraction and sparse
//! document × n-gram counts.

mod counts;
mod dictionary;
mod loader;
mod ngram;
mod tokenize;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

pub use counts::{count_encoded, count_vectors, CountMatrix};
pub use dictionary::Dictionary;
pub use loader::{load_imdb_dataset, load_polarity_dataset};
pub use ngram::{build_vocab, extract_ngrams, ngram_keys, NGram, NGramKey, NGramOrders, NGramVocabulary};
pub use tokenize::{decode_lossy, tokenize, tokenize_bytes, DIGIT_TOKEN};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Negative,
    Positive,
    Unlabeled,
}

impl Label {
    /// `+1` / `-1`; `None` for unlabeled documents.
    pub fn sign(self) -> Option<i8> {
        match self {
            Label::Positive => Some(1),
            Label::Negative => Some(-1),
            Label::Unlabeled => None,
        }
    }

    pub fn from_sign(sign: i8) -> Self {
        if sign >= 0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn is_labeled(self) -> bool {
        self != Label::Unlabeled
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub label: Label,
    /// Lowercased tokens, digit runs collapsed to `"0"`.
    pub tokens: Vec<String>,
}

impl Document {
    pub fn from_text(id: impl Into<String>, label: Label, raw: &str) -> Self {
        Self {
            id: id.into(),
            label,
            tokens: tokenize(raw),
        }
    }

    pub fn from_tokens(id: impl Into<String>, label: Label, tokens: Vec<String>) -> Self {
        Self {
            id: id.into(),
            label,
            tokens,
        }
    }
}

/// Predefined partition, as shipped with the IMDB collection.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub unlabeled: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub documents: Vec<Document>,
    pub split: Option<Split>,
}

impl Dataset {
    /// Fails when two documents share an id.
    pub fn new(name: impl Into<String>, documents: Vec<Document>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(documents.len());
        for d in &documents {
            if !seen.insert(d.id.as_str()) {
                return Err(Error::Config(format!("duplicate document id {:?}", d.id)));
            }
        }
        Ok(Self {
            name: name.into(),
            documents,
            split: None,
        })
    }

    pub fn with_split(mut self, split: Split) -> Self {
        self.split = Some(split);
        self
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Indices of documents carrying a ±1 label.
    pub fn labeled_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.documents[i].label.is_labeled()).collect()
    }

    /// Training documents: the predefined train partition when present,
    /// otherwise every document.
    pub fn training_documents(&self) -> Box<dyn Iterator<Item = &Document> + '_> {
        match &self.split {
            Some(s) => Box::new(s.train.iter().map(|&i| &self.documents[i])),
            None => Box::new(self.documents.iter()),
        }
    }

    /// Labels as ±1 for the given documents; unlabeled documents map to 0.
    pub fn signs(&self, indices: &[usize]) -> Vec<i8> {
        indices.iter().map(|&i| self.documents[i].label.sign().unwrap_or(0)).collect()
    }

    pub fn count_label(&self, label: Label) -> usize {
        self.documents.iter().filter(|d| d.label == label).count()
    }

    pub fn is_balanced(&self) -> bool {
        self.count_label(Label::Positive) == self.count_label(Label::Negative)
    }

    /// Restricts to the listed documents; the predefined split is dropped.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            documents: indices.iter().map(|&i| self.documents[i].clone()).collect(),
            split: None,
        }
    }
}
