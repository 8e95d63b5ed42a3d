//! N-grams, order sets, window extraction and the n-gram vocabulary.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Dataset, Dictionary};
use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 3;

/// A contiguous window of 1 to 3 words.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NGram {
    words: Vec<String>,
}

impl NGram {
    pub fn new<S: Into<String>>(words: impl IntoIterator<Item = S>) -> Result<Self> {
        let words: Vec<String> = words.into_iter().map(Into::into).collect();
        if words.is_empty() || words.len() > MAX_ORDER {
            return Err(Error::Config(format!(
                "n-gram order must be within 1..={MAX_ORDER}, got {}",
                words.len()
            )));
        }
        Ok(Self { words })
    }

    /// Splits on whitespace: `"not good"` → `("not", "good")`.
    pub fn parse(text: &str) -> Result<Self> {
        Self::new(text.split_whitespace())
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn n(&self) -> usize {
        self.words.len()
    }
}

impl fmt::Display for NGram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.words.join(" "))
    }
}

/// Subset of {1, 2, 3}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct NGramOrders(u8);

impl NGramOrders {
    pub const UNIGRAMS: NGramOrders = NGramOrders(0b001);

    pub fn new(orders: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut bits = 0u8;
        for n in orders {
            if !(1..=MAX_ORDER).contains(&n) {
                return Err(Error::Config(format!("n-gram order {n} outside 1..={MAX_ORDER}")));
            }
            bits |= 1 << (n - 1);
        }
        Ok(Self(bits))
    }

    pub fn contains(self, n: usize) -> bool {
        (1..=MAX_ORDER).contains(&n) && self.0 & (1 << (n - 1)) != 0
    }

    /// Included orders, ascending.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        (1..=MAX_ORDER).filter(move |&n| self.contains(n))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn max_order(self) -> usize {
        self.iter().last().unwrap_or(0)
    }
}

impl fmt::Display for NGramOrders {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|n| n.to_string()).collect();
        f.write_str(&parts.join("+"))
    }
}

impl FromStr for NGramOrders {
    type Err = Error;

    /// Accepts `"1+2"`, `"1,2,3"` or `"2"`.
    fn from_str(s: &str) -> Result<Self> {
        let orders = s
            .split(|c: char| c == '+' || c == ',' || c.is_whitespace())
            .filter(|p| !p.is_empty())
            .map(|p| p.parse::<usize>().map_err(|_| Error::Config(format!("invalid n-gram order {p:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(orders)
    }
}

impl Serialize for NGramOrders {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for NGramOrders {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        NGramOrders::new(v).map_err(serde::de::Error::custom)
    }
}

/// Compact n-gram identity in terms of dictionary ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NGramKey {
    ids: [u32; MAX_ORDER],
    n: u8,
}

impl NGramKey {
    pub fn new(ids: &[u32]) -> Self {
        assert!((1..=MAX_ORDER).contains(&ids.len()));
        let mut packed = [u32::MAX; MAX_ORDER];
        packed[..ids.len()].copy_from_slice(ids);
        Self {
            ids: packed,
            n: ids.len() as u8,
        }
    }

    #[inline]
    pub fn ids(&self) -> &[u32] {
        &self.ids[..self.n as usize]
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn to_ngram(&self, dictionary: &Dictionary) -> NGram {
        NGram {
            words: self.ids().iter().map(|&id| dictionary.word(id).to_string()).collect(),
        }
    }
}

/// Every in-dictionary window of each requested order, order-major then by
/// position. Windows containing any `None` (out-of-dictionary) token are
/// skipped.
pub fn ngram_keys(encoded: &[Option<u32>], orders: NGramOrders) -> impl Iterator<Item = NGramKey> + '_ {
    orders.iter().flat_map(move |n| {
        encoded.windows(n).filter_map(move |w| {
            let mut ids = [0u32; MAX_ORDER];
            for (slot, tok) in ids.iter_mut().zip(w) {
                *slot = (*tok)?;
            }
            Some(NGramKey::new(&ids[..n]))
        })
    })
}

/// Extracts the multiset of in-dictionary n-grams of the requested orders.
pub fn extract_ngrams<S: AsRef<str>>(tokens: &[S], orders: NGramOrders, dictionary: &Dictionary) -> Vec<NGram> {
    let encoded = dictionary.encode(tokens);
    ngram_keys(&encoded, orders).map(|k| k.to_ngram(dictionary)).collect()
}

/// Bijection between distinct n-grams and indices `0..N`, in first-occurrence
/// order.
#[derive(Debug, Clone)]
pub struct NGramVocabulary {
    dictionary: Arc<Dictionary>,
    orders: NGramOrders,
    keys: Vec<NGramKey>,
    index: HashMap<NGramKey, u32>,
}

impl NGramVocabulary {
    pub fn empty(dictionary: Arc<Dictionary>, orders: NGramOrders) -> Self {
        Self {
            dictionary,
            orders,
            keys: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Collects the distinct n-grams of already encoded documents.
    pub fn from_encoded<'a>(
        dictionary: Arc<Dictionary>,
        documents: impl IntoIterator<Item = &'a [Option<u32>]>,
        orders: NGramOrders,
    ) -> Result<Self> {
        let mut vocab = Self::empty(dictionary, orders);
        vocab.extend_from_encoded(documents);
        if vocab.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        Ok(vocab)
    }

    /// Appends n-grams not yet present; existing indices are untouched.
    pub fn extend_from_encoded<'a>(&mut self, documents: impl IntoIterator<Item = &'a [Option<u32>]>) {
        for doc in documents {
            for key in ngram_keys(doc, self.orders) {
                if !self.index.contains_key(&key) {
                    self.index.insert(key, self.keys.len() as u32);
                    self.keys.push(key);
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn orders(&self) -> NGramOrders {
        self.orders
    }

    pub fn dictionary(&self) -> &Arc<Dictionary> {
        &self.dictionary
    }

    pub fn keys(&self) -> &[NGramKey] {
        &self.keys
    }

    #[inline]
    pub fn index_of(&self, key: &NGramKey) -> Option<usize> {
        self.index.get(key).map(|&i| i as usize)
    }

    pub fn lookup(&self, ngram: &NGram) -> Option<usize> {
        let ids: Option<Vec<u32>> = ngram.words().iter().map(|w| self.dictionary.id(w)).collect();
        self.index_of(&NGramKey::new(&ids?))
    }

    pub fn ngram(&self, t: usize) -> NGram {
        self.keys[t].to_ngram(&self.dictionary)
    }
}

/// Vocabulary of the dataset's training documents.
pub fn build_vocab(dataset: &Dataset, orders: NGramOrders, dictionary: Arc<Dictionary>) -> Result<NGramVocabulary> {
    let encoded: Vec<Vec<Option<u32>>> = dataset.training_documents().map(|d| dictionary.encode(&d.tokens)).collect();
    NGramVocabulary::from_encoded(dictionary, encoded.iter().map(Vec::as_slice), orders)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, Label};
    use proptest::prelude::*;

    fn dict(words: &[&str]) -> Dictionary {
        words.iter().copied().collect()
    }

    fn orders(v: &[usize]) -> NGramOrders {
        NGramOrders::new(v.iter().copied()).unwrap()
    }

    fn ng(words: &[&str]) -> NGram {
        NGram::new(words.iter().copied()).unwrap()
    }

    /// Brute-force window enumeration over strings.
    fn oracle(tokens: &[&str], ord: &[usize], d: &Dictionary) -> Vec<NGram> {
        let mut out = Vec::new();
        for &n in ord {
            if tokens.len() < n {
                continue;
            }
            for start in 0..=tokens.len() - n {
                let w = &tokens[start..start + n];
                if w.iter().all(|t| d.contains(t)) {
                    out.push(ng(w));
                }
            }
        }
        out
    }

    #[test]
    fn no_window_longer_than_document() {
        assert!(extract_ngrams(&["a"], orders(&[2]), &dict(&["a"])).is_empty());
    }

    #[test]
    fn enumerates_all_windows() {
        let got = extract_ngrams(&["not", "good"], orders(&[1, 2]), &dict(&["not", "good"]));
        assert_eq!(got, vec![ng(&["not"]), ng(&["good"]), ng(&["not", "good"])]);
    }

    #[test]
    fn drops_windows_with_oov_words() {
        let d = dict(&["not", "good"]);
        let tokens = ["not", "xzq", "good"];
        let got = extract_ngrams(&tokens, orders(&[2]), &d);
        assert!(got.is_empty());
        assert_eq!(got, oracle(&tokens, &[2], &d));
    }

    #[test]
    fn orders_parse_and_display() {
        assert_eq!("1+2+3".parse::<NGramOrders>().unwrap().to_string(), "1+2+3");
        assert_eq!("2,1".parse::<NGramOrders>().unwrap(), orders(&[1, 2]));
        assert!("4".parse::<NGramOrders>().is_err());
        let json = serde_json::to_string(&orders(&[1, 3])).unwrap();
        assert_eq!(json, "[1,3]");
        assert_eq!(serde_json::from_str::<NGramOrders>(&json).unwrap(), orders(&[1, 3]));
    }

    fn dataset(docs: &[&[&str]]) -> Dataset {
        Dataset::new(
            "toy",
            docs.iter()
                .enumerate()
                .map(|(i, t)| Document::from_tokens(format!("d{i}"), Label::Positive, t.iter().map(|s| s.to_string()).collect()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn vocabulary_dedups_in_first_occurrence_order() {
        let d = Arc::new(dict(&["good", "bad"]));
        let one = build_vocab(&dataset(&[&["good"]]), orders(&[1]), d.clone()).unwrap();
        assert_eq!(one.len(), 1);
        let two = build_vocab(&dataset(&[&["good"], &["good"]]), orders(&[1]), d.clone()).unwrap();
        assert_eq!(two.len(), 1);
        let mixed = build_vocab(&dataset(&[&["bad", "good"], &["good", "bad"]]), orders(&[1, 2]), d.clone()).unwrap();
        let listed: Vec<String> = (0..mixed.len()).map(|t| mixed.ngram(t).to_string()).collect();
        assert_eq!(listed, ["bad", "good", "bad good", "good bad"]);
        assert_eq!(mixed.lookup(&ng(&["good", "bad"])), Some(3));
        assert_eq!(mixed.lookup(&ng(&["ugly"])), None);
    }

    #[test]
    fn empty_vocabulary_is_an_error() {
        let d = Arc::new(dict(&["good"]));
        let err = build_vocab(&dataset(&[&["meh"]]), orders(&[1]), d).unwrap_err();
        assert!(matches!(err, Error::EmptyVocabulary));
    }

    proptest! {
        #[test]
        fn full_dictionary_yields_all_windows(tokens in prop::collection::vec("[a-e]", 0..20), n in 1usize..=3) {
            let d = dict(&["a", "b", "c", "d", "e"]);
            let got = extract_ngrams(&tokens, orders(&[n]), &d);
            prop_assert_eq!(got.len(), tokens.len().saturating_sub(n - 1));
            let refs: Vec<&str> = tokens.iter().map(String::as_str).collect();
            prop_assert_eq!(got, oracle(&refs, &[n], &d));
        }

        #[test]
        fn removing_a_word_never_grows_vocabulary(
            docs in prop::collection::vec(prop::collection::vec("[a-f]", 1..12), 1..6),
            removed in "[a-f]",
        ) {
            let full = Arc::new(dict(&["a", "b", "c", "d", "e", "f"]));
            let smaller = Arc::new(full.without(&[removed.as_str()]));
            let refs: Vec<Vec<&str>> = docs.iter().map(|d| d.iter().map(String::as_str).collect()).collect();
            let slices: Vec<&[&str]> = refs.iter().map(Vec::as_slice).collect();
            let ds = dataset(&slices);
            let o = orders(&[1, 2, 3]);
            let big = build_vocab(&ds, o, full).map(|v| v.len()).unwrap_or(0);
            let small = build_vocab(&ds, o, smaller).map(|v| v.len()).unwrap_or(0);
            prop_assert!(small <= big);
        }
    }
}
