use std::collections::HashMap;

use super::{ngram_keys, Document, NGramVocabulary};
use crate::sparse::CsrMatrix;

/// Sparse documents × n-grams occurrence counts. Stored values are ≥ 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CountMatrix {
    csr: CsrMatrix<u32>,
}

impl CountMatrix {
    pub fn from_csr(csr: CsrMatrix<u32>) -> Self {
        debug_assert!((0..csr.n_rows()).all(|i| csr.row(i).1.iter().all(|&v| v >= 1)));
        Self { csr }
    }

    /// Builds from dense rows, dropping zeros.
    pub fn from_dense_rows(n_cols: usize, rows: &[Vec<u32>]) -> Self {
        Self::from_csr(CsrMatrix::from_rows(
            n_cols,
            rows.iter().map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(j, &c)| (j as u32, c))
                    .collect::<Vec<_>>()
            }),
        ))
    }

    pub fn n_docs(&self) -> usize {
        self.csr.n_rows()
    }

    pub fn n_ngrams(&self) -> usize {
        self.csr.n_cols()
    }

    pub fn csr(&self) -> &CsrMatrix<u32> {
        &self.csr
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.csr.row_iter(i)
    }

    pub fn get(&self, i: usize, t: usize) -> u32 {
        self.csr.get(i, t).unwrap_or(0)
    }

    /// Total occurrences in row `i`.
    pub fn row_total(&self, i: usize) -> u64 {
        self.csr.row(i).1.iter().map(|&c| c as u64).sum()
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            csr: self.csr.select_rows(rows),
        }
    }
}

/// Counts vocabulary n-grams per document; n-grams outside the vocabulary are
/// ignored.
pub fn count_vectors(documents: &[Document], vocab: &NGramVocabulary) -> CountMatrix {
    let dictionary = vocab.dictionary();
    let encoded: Vec<Vec<Option<u32>>> = documents.iter().map(|d| dictionary.encode(&d.tokens)).collect();
    count_encoded(encoded.iter().map(Vec::as_slice), vocab)
}

/// As [`count_vectors`] for documents already mapped to dictionary ids.
pub fn count_encoded<'a>(documents: impl IntoIterator<Item = &'a [Option<u32>]>, vocab: &NGramVocabulary) -> CountMatrix {
    let mut csr = CsrMatrix::empty(vocab.len());
    let mut row: HashMap<u32, u32> = HashMap::new();
    let mut sorted: Vec<(u32, u32)> = Vec::new();
    for doc in documents {
        row.clear();
        for key in ngram_keys(doc, vocab.orders()) {
            if let Some(t) = vocab.index_of(&key) {
                *row.entry(t as u32).or_insert(0) += 1;
            }
        }
        sorted.clear();
        sorted.extend(row.iter().map(|(&t, &c)| (t, c)));
        sorted.sort_unstable_by_key(|&(t, _)| t);
        csr.push_row(sorted.iter().copied());
    }
    CountMatrix { csr }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::corpus::{extract_ngrams, Dictionary, Label, NGram, NGramOrders};
    use proptest::prelude::*;

    fn doc(tokens: &[&str]) -> Document {
        Document::from_tokens("d", Label::Positive, tokens.iter().map(|s| s.to_string()).collect())
    }

    fn vocab(words: &[&str], docs: &[Document], orders: &[usize]) -> NGramVocabulary {
        let d: Arc<Dictionary> = Arc::new(words.iter().copied().collect());
        let enc: Vec<_> = docs.iter().map(|x| d.encode(&x.tokens)).collect();
        NGramVocabulary::from_encoded(d, enc.iter().map(Vec::as_slice), NGramOrders::new(orders.iter().copied()).unwrap()).unwrap()
    }

    #[test]
    fn repeated_token_counts() {
        let docs = [doc(&["good", "good"])];
        let v = vocab(&["good"], &docs, &[1]);
        let m = count_vectors(&docs, &v);
        assert_eq!(m.get(0, 0), 2);
    }

    #[test]
    fn document_without_vocabulary_ngrams_is_empty_row() {
        let v = vocab(&["good"], &[doc(&["good"])], &[1]);
        let m = count_vectors(&[doc(&["bad", "ugly"])], &v);
        assert_eq!(m.row(0).count(), 0);
        assert_eq!(m.row_total(0), 0);
    }

    #[test]
    fn bigram_counts_match_window_enumeration() {
        let d = doc(&["not", "good", "not", "good"]);
        let v = vocab(&["not", "good"], std::slice::from_ref(&d), &[1, 2]);
        let m = count_vectors(std::slice::from_ref(&d), &v);
        let count = |words: &[&str]| m.get(0, v.lookup(&NGram::new(words.iter().copied()).unwrap()).unwrap());
        assert_eq!(count(&["not"]), 2);
        assert_eq!(count(&["good"]), 2);
        assert_eq!(count(&["not", "good"]), 2);
        assert_eq!(count(&["good", "not"]), 1);
    }

    proptest! {
        #[test]
        fn row_sums_equal_extracted_multiset_sizes(
            docs in prop::collection::vec(prop::collection::vec("[a-d]", 0..15), 1..5),
        ) {
            let words = ["a", "b", "c"];
            let documents: Vec<Document> = docs.iter().map(|t| doc(&t.iter().map(String::as_str).collect::<Vec<_>>())).collect();
            let d: Arc<Dictionary> = Arc::new(words.iter().copied().collect());
            let orders = NGramOrders::new([1, 2, 3]).unwrap();
            let enc: Vec<_> = documents.iter().map(|x| d.encode(&x.tokens)).collect();
            if let Ok(v) = NGramVocabulary::from_encoded(d.clone(), enc.iter().map(Vec::as_slice), orders) {
                let m = count_vectors(&documents, &v);
                for (i, dd) in documents.iter().enumerate() {
                    prop_assert_eq!(m.row_total(i) as usize, extract_ngrams(&dd.tokens, orders, &d).len());
                    prop_assert!(m.row(i).all(|(_, c)| c >= 1));
                }
            }
        }
    }
}
