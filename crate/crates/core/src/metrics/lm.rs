//! Word n-gram language model with interpolated absolute discounting.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::MetricError;
use crate::text::{normalized_tokens, segment_sentences};

pub const UNK: &str = "<unk>";
const BOS: u32 = u32::MAX;
pub const DEFAULT_DISCOUNT: f64 = 0.75;

/// A scorer of token sequences. Implementations must be read-only after
/// construction so one instance can serve many threads.
pub trait LanguageModel: Send + Sync {
    /// Natural-log probability of the sequence, summed token by token with no
    /// end-of-sentence term.
    fn log_prob(&self, tokens: &[String]) -> f64;
    fn unigram_log_prob(&self, token: &str) -> f64;
    /// Vocabulary including the unknown-word symbol.
    fn vocabulary(&self) -> Vec<String>;
}

#[derive(Debug, Clone, Default)]
struct ContextStats {
    total: u64,
    followers: HashMap<u32, u64>,
}

/// Order-n model. Orders 1..=5 are supported.
#[derive(Debug, Clone)]
pub struct NgramLm {
    order: usize,
    discount: f64,
    vocab: Vec<String>,
    ids: HashMap<String, u32>,
    // contexts[k] maps a k-token history to its follower counts
    contexts: Vec<HashMap<Vec<u32>, ContextStats>>,
}

#[derive(Serialize, Deserialize)]
struct LmFile {
    format: String,
    order: usize,
    discount: f64,
    vocab: Vec<String>,
    /// Every (history, word, count) triple; `u32::MAX` marks sentence start.
    ngrams: Vec<(Vec<u32>, u32, u64)>,
}

impl NgramLm {
    /// Trains on documents, one sentence per training sequence.
    pub fn train<'a>(corpus: impl IntoIterator<Item = &'a str>, order: usize) -> Result<Self, MetricError> {
        let sentences = corpus
            .into_iter()
            .flat_map(|doc| segment_sentences(doc).into_iter().map(|s| normalized_tokens(&s.text)));
        Self::train_tokens(sentences, order, DEFAULT_DISCOUNT)
    }

    pub fn train_tokens(
        sentences: impl IntoIterator<Item = Vec<String>>,
        order: usize,
        discount: f64,
    ) -> Result<Self, MetricError> {
        if !(1..=5).contains(&order) {
            return Err(MetricError::InvalidOrder(order));
        }
        let mut lm = NgramLm {
            order,
            discount,
            vocab: vec![UNK.to_string()],
            ids: HashMap::from([(UNK.to_string(), 0)]),
            contexts: vec![HashMap::new(); order],
        };
        let mut any = false;
        for sent in sentences {
            if sent.is_empty() {
                continue;
            }
            any = true;
            let ids: Vec<u32> = sent.iter().map(|w| lm.intern(w)).collect();
            let padded: Vec<u32> = std::iter::repeat_n(BOS, order - 1).chain(ids).collect();
            for i in order - 1..padded.len() {
                let w = padded[i];
                for k in 0..order {
                    let hist = padded[i - k..i].to_vec();
                    lm.add(k, hist, w, 1);
                }
            }
        }
        if !any {
            return Err(MetricError::EmptyCorpus);
        }
        Ok(lm)
    }

    fn intern(&mut self, w: &str) -> u32 {
        if let Some(&id) = self.ids.get(w) {
            return id;
        }
        let id = self.vocab.len() as u32;
        self.vocab.push(w.to_string());
        self.ids.insert(w.to_string(), id);
        id
    }

    fn add(&mut self, k: usize, hist: Vec<u32>, w: u32, n: u64) {
        let st = self.contexts[k].entry(hist).or_default();
        st.total += n;
        *st.followers.entry(w).or_insert(0) += n;
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn id(&self, w: &str) -> u32 {
        self.ids.get(w).copied().unwrap_or(0)
    }

    /// P(w | history) by recursive interpolation; `history` may be shorter
    /// than order − 1 and is padded with sentence-start symbols.
    pub fn prob(&self, history: &[String], w: &str) -> f64 {
        let ids: Vec<u32> = history.iter().map(|h| self.id(h)).collect();
        let padded: Vec<u32> = std::iter::repeat_n(BOS, (self.order - 1).saturating_sub(ids.len()))
            .chain(ids[ids.len().saturating_sub(self.order - 1)..].iter().copied())
            .collect();
        self.prob_ids(&padded, self.id(w))
    }

    fn prob_ids(&self, hist: &[u32], w: u32) -> f64 {
        let uniform = 1.0 / self.vocab.len() as f64;
        let mut p = uniform;
        // build from the unigram level upward
        for k in 0..=hist.len() {
            let h = &hist[hist.len() - k..];
            let Some(st) = self.contexts[k].get(h) else {
                continue;
            };
            let c = st.followers.get(&w).copied().unwrap_or(0) as f64;
            let total = st.total as f64;
            let types = st.followers.len() as f64;
            p = (c - self.discount).max(0.0) / total + self.discount * types / total * p;
        }
        p
    }

    pub fn save(&self) -> String {
        let mut ngrams = Vec::new();
        for ctx in &self.contexts {
            for (h, st) in ctx {
                for (&w, &c) in &st.followers {
                    ngrams.push((h.clone(), w, c));
                }
            }
        }
        ngrams.sort();
        serde_json::to_string(&LmFile {
            format: "revkit-ngram-v1".into(),
            order: self.order,
            discount: self.discount,
            vocab: self.vocab.clone(),
            ngrams,
        })
        .expect("serializable")
    }

    pub fn load(s: &str) -> Result<Self, MetricError> {
        let f: LmFile = serde_json::from_str(s).map_err(|e| MetricError::ModelFormat(e.to_string()))?;
        if !(1..=5).contains(&f.order) || f.vocab.first().map(String::as_str) != Some(UNK) {
            return Err(MetricError::ModelFormat("bad order or vocabulary".into()));
        }
        let ids = f.vocab.iter().enumerate().map(|(i, w)| (w.clone(), i as u32)).collect();
        let mut lm = NgramLm {
            order: f.order,
            discount: f.discount,
            vocab: f.vocab,
            ids,
            contexts: vec![HashMap::new(); f.order],
        };
        for (h, w, c) in f.ngrams {
            if h.len() >= lm.order || w as usize >= lm.vocab.len() {
                return Err(MetricError::ModelFormat("n-gram outside model".into()));
            }
            lm.add(h.len(), h, w, c);
        }
        Ok(lm)
    }
}

impl LanguageModel for NgramLm {
    fn log_prob(&self, tokens: &[String]) -> f64 {
        if self.order == 1 {
            return tokens.iter().map(|t| self.unigram_log_prob(t)).sum();
        }
        let ids: Vec<u32> = tokens.iter().map(|t| self.id(t)).collect();
        let padded: Vec<u32> = std::iter::repeat_n(BOS, self.order - 1).chain(ids).collect();
        (self.order - 1..padded.len())
            .map(|i| self.prob_ids(&padded[i + 1 - self.order..i], padded[i]).ln())
            .sum()
    }

    fn unigram_log_prob(&self, token: &str) -> f64 {
        self.prob_ids(&[], self.id(token)).ln()
    }

    fn vocabulary(&self) -> Vec<String> {
        self.vocab.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn count_dominance() {
        let lm = NgramLm::train_tokens([toks("a b a b")], 2, DEFAULT_DISCOUNT).unwrap();
        let h = toks("a");
        assert!(lm.prob(&h, "b") > lm.prob(&h, "a"));
    }

    #[test]
    fn invalid_orders() {
        assert_eq!(NgramLm::train(["x"], 0).unwrap_err(), MetricError::InvalidOrder(0));
        assert_eq!(NgramLm::train(["x"], 6).unwrap_err(), MetricError::InvalidOrder(6));
        assert_eq!(NgramLm::train([""], 2).unwrap_err(), MetricError::EmptyCorpus);
    }

    #[test]
    fn unseen_words_are_finite() {
        let lm = NgramLm::train(["The cat sat on the mat."], 3).unwrap();
        let lp = lm.log_prob(&toks("zebra quantum"));
        assert!(lp.is_finite() && lp < 0.0);
    }

    #[test]
    fn save_load_round_trip() {
        let lm = NgramLm::train(["The cat sat on the mat. The dog sat too."], 3).unwrap();
        let back = NgramLm::load(&lm.save()).unwrap();
        let s = toks("the dog sat on the mat");
        assert_eq!(lm.log_prob(&s), back.log_prob(&s));
    }
}
