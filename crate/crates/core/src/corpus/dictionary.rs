use std::collections::HashMap;

/// Word ↔ dense id map. Ids are assigned in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dictionary {
    words: Vec<String>,
    index: HashMap<String, u32>,
}

impl Dictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id of `word`, inserting it when absent.
    pub fn insert(&mut self, word: &str) -> u32 {
        if let Some(&id) = self.index.get(word) {
            return id;
        }
        let id = self.words.len() as u32;
        self.words.push(word.to_string());
        self.index.insert(word.to_string(), id);
        id
    }

    #[inline]
    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    #[inline]
    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Maps tokens to ids; out-of-dictionary tokens become `None`.
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<Option<u32>> {
        tokens.iter().map(|t| self.id(t.as_ref())).collect()
    }

    /// Copy without the given words; remaining ids are renumbered.
    pub fn without(&self, removed: &[&str]) -> Dictionary {
        self.words
            .iter()
            .filter(|w| !removed.contains(&w.as_str()))
            .map(String::as_str)
            .collect()
    }
}

impl<'a> FromIterator<&'a str> for Dictionary {
    fn from_iter<I: IntoIterator<Item = &'a str>>(iter: I) -> Self {
        let mut d = Dictionary::new();
        for w in iter {
            d.insert(w);
        }
        d
    }
}
