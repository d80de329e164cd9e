use std::collections::HashMap;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

pub const PAD_ID: u32 = 0;
pub const CLS_ID: u32 = 1;
pub const SEP_ID: u32 = 2;
pub const UNK_ID: u32 = 3;
const SPECIALS: [&str; 4] = ["[PAD]", "[CLS]", "[SEP]", "[UNK]"];

static WORD_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\w+|[^\w\s]").expect("valid regex"));

/// Lower-cased word pieces: runs of word characters, or single symbols.
pub fn split_words(text: &str) -> Vec<String> {
    WORD_RE.find_iter(text).map(|m| m.as_str().to_lowercase()).collect()
}

/// `[CLS] a [SEP]`, truncating `a` to fit `max_len`.
pub fn single_sequence(a: &[u32], max_len: usize) -> Vec<u32> {
    let keep = a.len().min(max_len.saturating_sub(2));
    let mut out = Vec::with_capacity(keep + 2);
    out.push(CLS_ID);
    out.extend_from_slice(&a[..keep]);
    out.push(SEP_ID);
    out
}

/// Lengths of `a` and `b` after longest-first truncation into a budget of
/// `max_len - 3` tokens. Ties trim `b`.
pub fn truncated_lengths(a: usize, b: usize, max_len: usize) -> (usize, usize) {
    let budget = max_len.saturating_sub(3);
    let (mut la, mut lb) = (a, b);
    while la + lb > budget {
        if la > lb {
            la -= 1;
        } else {
            lb -= 1;
        }
    }
    (la, lb)
}

/// `[CLS] a [SEP] b [SEP]` with longest-first truncation.
pub fn pair_sequence(a: &[u32], b: &[u32], max_len: usize) -> Vec<u32> {
    let (la, lb) = truncated_lengths(a.len(), b.len(), max_len);
    let mut out = Vec::with_capacity(la + lb + 3);
    out.push(CLS_ID);
    out.extend_from_slice(&a[..la]);
    out.push(SEP_ID);
    out.extend_from_slice(&b[..lb]);
    out.push(SEP_ID);
    out
}

/// Word-level vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tokenizer {
    vocab: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, u32>,
    pub max_len: usize,
}

impl Tokenizer {
    pub const DEFAULT_MAX_LEN: usize = 128;

    /// Keeps words seen at least `min_count` times, most frequent first
    /// (ties alphabetical).
    pub fn fit<'a, I>(texts: I, min_count: usize, max_len: usize) -> Self
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut counts: HashMap<String, usize> = HashMap::new();
        for t in texts {
            for w in split_words(t) {
                *counts.entry(w).or_default() += 1;
            }
        }
        let mut words: Vec<(String, usize)> = counts.into_iter().filter(|(_, c)| *c >= min_count.max(1)).collect();
        words.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let vocab = SPECIALS
            .iter()
            .map(|s| s.to_string())
            .chain(words.into_iter().map(|(w, _)| w))
            .collect();
        Tokenizer::from_vocab(vocab, max_len)
    }

    pub fn from_vocab(vocab: Vec<String>, max_len: usize) -> Self {
        let mut t = Tokenizer {
            vocab,
            index: HashMap::new(),
            max_len,
        };
        t.rebuild_index();
        t
    }

    /// Restores the lookup table after deserialization.
    pub fn rebuild_index(&mut self) {
        self.index = self.vocab.iter().enumerate().map(|(i, w)| (w.clone(), i as u32)).collect();
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn word_ids(&self, text: &str) -> Vec<u32> {
        split_words(text)
            .iter()
            .map(|w| self.index.get(w).copied().unwrap_or(UNK_ID))
            .collect()
    }

    pub fn encode(&self, text: &str) -> Vec<u32> {
        single_sequence(&self.word_ids(text), self.max_len)
    }

    pub fn encode_pair(&self, a: &str, b: &str) -> Vec<u32> {
        pair_sequence(&self.word_ids(a), &self.word_ids(b), self.max_len)
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.vocab.get(id as usize).map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_orders_by_frequency() {
        let t = Tokenizer::fit(["b a a", "c a b"], 1, 16);
        assert_eq!(t.token(4), Some("a"));
        assert_eq!(t.token(5), Some("b"));
        assert_eq!(t.encode("A zzz"), vec![CLS_ID, 4, UNK_ID, SEP_ID]);
    }

    #[test]
    fn single_truncation() {
        assert_eq!(single_sequence(&[7, 8, 9], 4), vec![CLS_ID, 7, 8, SEP_ID]);
    }

    #[test]
    fn pair_truncation_trims_longer_first() {
        assert_eq!(truncated_lengths(10, 2, 10), (5, 2));
        assert_eq!(truncated_lengths(4, 4, 9), (3, 3));
        assert_eq!(truncated_lengths(2, 2, 16), (2, 2));
        let seq = pair_sequence(&[5, 5, 5, 5], &[6], 6);
        assert_eq!(seq, vec![CLS_ID, 5, 5, SEP_ID, 6, SEP_ID]);
    }
}
