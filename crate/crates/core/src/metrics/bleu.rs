//! BLEU-4 at sentence level (+1 smoothing for n ≥ 2) and corpus level.

use std::collections::HashMap;

use super::{ngrams, MetricError};
use crate::text::normalized_tokens;

/// Clipped matches and candidate totals per order 1..=4, plus lengths.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BleuStats {
    pub matches: [usize; 4],
    pub totals: [usize; 4],
    pub hyp_len: usize,
    pub ref_len: usize,
}

impl BleuStats {
    pub fn add(&mut self, o: &BleuStats) {
        for n in 0..4 {
            self.matches[n] += o.matches[n];
            self.totals[n] += o.totals[n];
        }
        self.hyp_len += o.hyp_len;
        self.ref_len += o.ref_len;
    }
}

pub fn bleu_stats(hyp: &[&str], refs: &[Vec<&str>]) -> BleuStats {
    let mut st = BleuStats {
        hyp_len: hyp.len(),
        ..Default::default()
    };
    // closest reference length, shorter on ties
    st.ref_len = refs
        .iter()
        .map(Vec::len)
        .min_by_key(|&l| (l.abs_diff(hyp.len()), l))
        .unwrap_or(0);
    for n in 1..=4 {
        let mut max_ref: HashMap<Vec<&str>, usize> = HashMap::new();
        for r in refs {
            let mut c: HashMap<Vec<&str>, usize> = HashMap::new();
            for g in ngrams(r, n) {
                *c.entry(g).or_insert(0) += 1;
            }
            for (g, k) in c {
                let e = max_ref.entry(g).or_insert(0);
                *e = (*e).max(k);
            }
        }
        let mut hc: HashMap<Vec<&str>, usize> = HashMap::new();
        for g in ngrams(hyp, n) {
            *hc.entry(g).or_insert(0) += 1;
        }
        st.matches[n - 1] = hc.iter().map(|(g, &k)| k.min(max_ref.get(g).copied().unwrap_or(0))).sum();
        st.totals[n - 1] = hyp.len().saturating_sub(n - 1);
    }
    st
}

/// BLEU in [0, 100] from accumulated statistics.
pub fn bleu_from_stats(st: &BleuStats, smooth: bool) -> f64 {
    if st.hyp_len == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 0..4 {
        let (m, t) = if smooth && n > 0 {
            (st.matches[n] + 1, st.totals[n] + 1)
        } else {
            (st.matches[n], st.totals[n])
        };
        if m == 0 || t == 0 {
            return 0.0;
        }
        log_sum += (m as f64 / t as f64).ln();
    }
    let bp = if st.hyp_len < st.ref_len {
        (1.0 - st.ref_len as f64 / st.hyp_len as f64).exp()
    } else {
        1.0
    };
    100.0 * bp * (log_sum / 4.0).exp()
}

fn toks(s: &str) -> Vec<String> {
    normalized_tokens(s)
}

/// Smoothed sentence BLEU.
pub fn sentence_bleu(prediction: &str, references: &[&str]) -> Result<f64, MetricError> {
    if references.is_empty() {
        return Err(MetricError::EmptyReferences);
    }
    let h = toks(prediction);
    let r: Vec<Vec<String>> = references.iter().map(|x| toks(x)).collect();
    let hv: Vec<&str> = h.iter().map(String::as_str).collect();
    let rv: Vec<Vec<&str>> = r.iter().map(|t| t.iter().map(String::as_str).collect()).collect();
    Ok(bleu_from_stats(&bleu_stats(&hv, &rv), true))
}

/// Unsmoothed corpus BLEU over (prediction, references) pairs.
pub fn corpus_bleu(pairs: &[(&str, Vec<&str>)]) -> Result<f64, MetricError> {
    let mut total = BleuStats::default();
    for (p, refs) in pairs {
        if refs.is_empty() {
            return Err(MetricError::EmptyReferences);
        }
        let h = toks(p);
        let r: Vec<Vec<String>> = refs.iter().map(|x| toks(x)).collect();
        let hv: Vec<&str> = h.iter().map(String::as_str).collect();
        let rv: Vec<Vec<&str>> = r.iter().map(|t| t.iter().map(String::as_str).collect()).collect();
        total.add(&bleu_stats(&hv, &rv));
    }
    Ok(bleu_from_stats(&total, false))
}
