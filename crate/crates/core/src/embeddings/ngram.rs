//! N-gram vectors as the mean of their word vectors.

use std::sync::Arc;

use ndarray::Array2;

use super::WordVectors;
use crate::corpus::{NGram, NGramKey, NGramVocabulary};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Mean of the word vectors of `ngram`.
pub fn embed_ngram<T: Scalar>(ngram: &NGram, wv: &WordVectors<T>) -> Result<Vec<T>> {
    let mut out = vec![T::zero(); wv.dim()];
    let ids = ngram
        .words()
        .iter()
        .enumerate()
        .map(|(position, w)| {
            wv.dictionary()
                .id(w)
                .ok_or_else(|| Error::UnknownWord { word: w.clone(), position })
        })
        .collect::<Result<Vec<u32>>>()?;
    mean_into(&ids, wv, &mut out);
    Ok(out)
}

#[inline]
fn mean_into<T: Scalar>(ids: &[u32], wv: &WordVectors<T>, out: &mut [T]) {
    out.fill(T::zero());
    for &id in ids {
        for (o, &x) in out.iter_mut().zip(wv.row(id)) {
            *o += x;
        }
    }
    let n = T::lit(ids.len() as f64);
    for o in out.iter_mut() {
        *o /= n;
    }
}

/// One embedding row per vocabulary entry.
#[derive(Debug, Clone)]
pub struct NGramEmbeddingTable<T> {
    pub vocabulary: NGramVocabulary,
    pub matrix: Array2<T>,
}

impl<T: Scalar> NGramEmbeddingTable<T> {
    pub fn len(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Embeds every vocabulary entry. The vocabulary may use a different
/// dictionary than `wv`; words are then matched by spelling.
pub fn embed_all<T: Scalar>(vocab: &NGramVocabulary, wv: &WordVectors<T>) -> Result<NGramEmbeddingTable<T>> {
    let matrix = embed_keys(vocab, vocab.keys(), wv)?;
    Ok(NGramEmbeddingTable {
        vocabulary: vocab.clone(),
        matrix,
    })
}

/// Embeds a list of keys expressed in `vocab`'s dictionary.
pub fn embed_keys<T: Scalar>(vocab: &NGramVocabulary, keys: &[NGramKey], wv: &WordVectors<T>) -> Result<Array2<T>> {
    let same_dictionary = Arc::ptr_eq(vocab.dictionary(), wv.dictionary());
    let translate: Option<Vec<Option<u32>>> =
        (!same_dictionary).then(|| vocab.dictionary().words().iter().map(|w| wv.dictionary().id(w)).collect());
    let mut matrix = Array2::zeros((keys.len(), wv.dim()));
    let mut ids = Vec::with_capacity(3);
    for (key, mut row) in keys.iter().zip(matrix.rows_mut()) {
        ids.clear();
        for (position, &id) in key.ids().iter().enumerate() {
            let mapped = match &translate {
                None => Some(id),
                Some(t) => t[id as usize],
            };
            ids.push(mapped.ok_or_else(|| Error::UnknownWord {
                word: vocab.dictionary().word(id).to_string(),
                position,
            })?);
        }
        mean_into(&ids, wv, row.as_slice_mut().expect("standard layout"));
    }
    Ok(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Dictionary, NGramOrders};
    use proptest::prelude::*;

    fn wv(pairs: &[(&str, Vec<f64>)]) -> WordVectors<f64> {
        WordVectors::from_pairs(pairs.iter().map(|(w, v)| (*w, v.clone()))).unwrap()
    }

    fn ng(words: &[&str]) -> NGram {
        NGram::new(words.iter().copied()).unwrap()
    }

    #[test]
    fn unigram_is_the_word_vector() {
        let v = wv(&[("good", vec![0.3, -1.2, 4.0])]);
        assert_eq!(embed_ngram(&ng(&["good"]), &v).unwrap(), vec![0.3, -1.2, 4.0]);
    }

    #[test]
    fn bigram_mean() {
        let v = wv(&[("a", vec![1.0, 0.0]), ("b", vec![0.0, 1.0])]);
        assert_eq!(embed_ngram(&ng(&["a", "b"]), &v).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn trigram_mean_matches_summation_oracle() {
        let v = wv(&[("a", vec![3.0, 0.0]), ("b", vec![0.0, 3.0]), ("c", vec![3.0, 3.0])]);
        let got = embed_ngram(&ng(&["a", "b", "c"]), &v).unwrap();
        let oracle: Vec<f64> = (0..2)
            .map(|j| ["a", "b", "c"].iter().map(|w| v.get(w).unwrap()[j]).sum::<f64>() / 3.0)
            .collect();
        assert_eq!(got, vec![2.0, 2.0]);
        assert_eq!(got, oracle);
    }

    #[test]
    fn unknown_word_reports_position() {
        let v = wv(&[("a", vec![1.0])]);
        match embed_ngram(&ng(&["a", "zz"]), &v) {
            Err(Error::UnknownWord { word, position }) => assert_eq!((word.as_str(), position), ("zz", 1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn table_rows_match_individual_embeddings() {
        let v = wv(&[("a", vec![1.0, 2.0]), ("b", vec![-1.0, 0.5]), ("c", vec![0.25, 0.0])]);
        let tokens: Vec<Option<u32>> = ["a", "b", "c", "a"].iter().map(|w| v.dictionary().id(w)).collect();
        let vocab =
            NGramVocabulary::from_encoded(v.dictionary().clone(), [tokens.as_slice()], NGramOrders::new([1, 2, 3]).unwrap()).unwrap();
        let table = embed_all(&vocab, &v).unwrap();
        assert_eq!(table.len(), vocab.len());
        for t in 0..vocab.len() {
            assert_eq!(table.matrix.row(t).to_vec(), embed_ngram(&vocab.ngram(t), &v).unwrap());
        }
    }

    #[test]
    fn empty_vocabulary_gives_empty_table() {
        let v = wv(&[("a", vec![1.0, 2.0])]);
        let vocab = NGramVocabulary::empty(v.dictionary().clone(), NGramOrders::UNIGRAMS);
        let table = embed_all(&vocab, &v).unwrap();
        assert_eq!(table.matrix.dim(), (0, 2));
    }

    #[test]
    fn foreign_dictionary_is_matched_by_word() {
        let v = wv(&[("a", vec![1.0]), ("b", vec![3.0])]);
        let other: Arc<Dictionary> = Arc::new(["b", "a", "zz"].into_iter().collect());
        let enc = other.encode(&["b", "a", "zz"]);
        let vocab = NGramVocabulary::from_encoded(other, [enc.as_slice()], NGramOrders::new([1, 2]).unwrap()).unwrap();
        let err = embed_all(&vocab, &v).unwrap_err();
        assert!(matches!(err, Error::UnknownWord { .. }));
        let ok_keys = &vocab.keys()[..2];
        let m = embed_keys(&vocab, ok_keys, &v).unwrap();
        assert_eq!(m.column(0).to_vec(), vec![3.0, 1.0]);
    }

    proptest! {
        #[test]
        fn repeated_word_bigram_is_exact(x in prop::collection::vec(-1e3f64..1e3, 1..8)) {
            let v = wv(&[("w", x.clone())]);
            prop_assert_eq!(embed_ngram(&ng(&["w", "w"]), &v).unwrap(), x);
        }

        #[test]
        fn mean_stays_inside_the_largest_norm(
            a in prop::collection::vec(-10f64..10.0, 4),
            b in prop::collection::vec(-10f64..10.0, 4),
            c in prop::collection::vec(-10f64..10.0, 4),
        ) {
            let v = wv(&[("a", a.clone()), ("b", b.clone()), ("c", c.clone())]);
            let norm = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let bound = norm(&a).max(norm(&b)).max(norm(&c));
            let e = embed_ngram(&ng(&["a", "b", "c"]), &v).unwrap();
            prop_assert_eq!(e.len(), 4);
            prop_assert!(norm(&e) <= bound * (1.0 + 1e-12));
        }
    }
}
