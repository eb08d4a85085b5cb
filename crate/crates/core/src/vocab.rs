//! Token vocabulary with the two reserved entries every model shares.

use std::collections::HashMap;

use crate::corpus::Corpus;

pub const UNK: &str = "<unk>";
pub const MASK: &str = "<mask>";
pub const UNK_ID: u32 = 0;
pub const MASK_ID: u32 = 1;

/// Bidirectional token-text <-> dense-id map. Id 0 is `<unk>`, id 1 is
/// `<mask>`; the rest are assigned in first-seen order, which keeps every
/// model built from the same corpus bit-for-bit reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocab {
    items: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocab {
    pub fn new() -> Self {
        let mut v = Vocab {
            items: Vec::new(),
            index: HashMap::new(),
        };
        v.insert(UNK);
        v.insert(MASK);
        v
    }

    /// Vocabulary over every token text in the corpus.
    pub fn from_corpus(corpus: &Corpus) -> Self {
        let mut v = Vocab::new();
        for file in &corpus.files {
            for tok in file.stream.tokens() {
                v.insert(&tok.text);
            }
        }
        v
    }

    /// Insert `text` if absent; returns its id either way.
    pub fn insert(&mut self, text: &str) -> u32 {
        if let Some(&id) = self.index.get(text) {
            return id;
        }
        let id = self.items.len() as u32;
        self.items.push(text.to_string());
        self.index.insert(text.to_string(), id);
        id
    }

    pub fn id_of(&self, text: &str) -> Option<u32> {
        self.index.get(text).copied()
    }

    /// Id of `text`, falling back to `<unk>`.
    pub fn id_or_unk(&self, text: &str) -> u32 {
        self.id_of(text).unwrap_or(UNK_ID)
    }

    pub fn text(&self, id: u32) -> &str {
        &self.items[id as usize]
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the reserved entries are always present
    }

    /// Ids that correspond to real emittable tokens (skips `<unk>`/`<mask>`).
    pub fn emittable_ids(&self) -> std::ops::Range<u32> {
        2..self.items.len() as u32
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &str)> {
        self.items
            .iter()
            .enumerate()
            .map(|(i, s)| (i as u32, s.as_str()))
    }
}

impl Default for Vocab {
    fn default() -> Self {
        Vocab::new()
    }
}
