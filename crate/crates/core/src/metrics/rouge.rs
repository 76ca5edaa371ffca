//! ROUGE-1, ROUGE-2 and ROUGE-L F1.

use std::collections::HashMap;

use super::ngrams;
use crate::diff::lcs_len;
use crate::text::normalized_tokens;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RougeScore {
    pub r1: f64,
    pub r2: f64,
    pub rl: f64,
}

/// Overlap, prediction size and reference size for ROUGE-1, -2 and -L.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RougeCounts {
    pub hits: [usize; 3],
    pub pred: [usize; 3],
    pub reference: [usize; 3],
}

impl RougeCounts {
    pub fn add(&mut self, o: &RougeCounts) {
        for i in 0..3 {
            self.hits[i] += o.hits[i];
            self.pred[i] += o.pred[i];
            self.reference[i] += o.reference[i];
        }
    }

    pub fn score(&self) -> RougeScore {
        let f = |i: usize| {
            if self.pred[i] == 0 && self.reference[i] == 0 {
                return 100.0;
            }
            if self.hits[i] == 0 {
                return 0.0;
            }
            let p = self.hits[i] as f64 / self.pred[i] as f64;
            let r = self.hits[i] as f64 / self.reference[i] as f64;
            100.0 * 2.0 * p * r / (p + r)
        };
        RougeScore { r1: f(0), r2: f(1), rl: f(2) }
    }
}

fn overlap(pred: &[&str], reference: &[&str], n: usize) -> (usize, usize, usize) {
    let pg = ngrams(pred, n);
    let rg = ngrams(reference, n);
    let mut rc: HashMap<&[&str], usize> = HashMap::new();
    for g in &rg {
        *rc.entry(g.as_slice()).or_insert(0) += 1;
    }
    let mut hits = 0;
    for g in &pg {
        if let Some(c) = rc.get_mut(g.as_slice()) {
            if *c > 0 {
                *c -= 1;
                hits += 1;
            }
        }
    }
    (hits, pg.len(), rg.len())
}

pub fn rouge_counts(pred: &[&str], reference: &[&str]) -> RougeCounts {
    let (h1, p1, r1) = overlap(pred, reference, 1);
    let (h2, p2, r2) = overlap(pred, reference, 2);
    RougeCounts {
        hits: [h1, h2, lcs_len(pred, reference)],
        pred: [p1, p2, pred.len()],
        reference: [r1, r2, reference.len()],
    }
}

pub fn rouge_tokens(pred: &[&str], reference: &[&str]) -> RougeScore {
    rouge_counts(pred, reference).score()
}

fn owned_counts(prediction: &str, reference: &str) -> RougeCounts {
    let p = normalized_tokens(prediction);
    let r = normalized_tokens(reference);
    let pv: Vec<&str> = p.iter().map(String::as_str).collect();
    let rv: Vec<&str> = r.iter().map(String::as_str).collect();
    rouge_counts(&pv, &rv)
}

pub fn rouge(prediction: &str, reference: &str) -> RougeScore {
    owned_counts(prediction, reference).score()
}

/// Counts against the reference with the best ROUGE-L.
pub fn best_reference_counts(prediction: &str, references: &[&str]) -> RougeCounts {
    references
        .iter()
        .map(|r| owned_counts(prediction, r))
        .max_by(|a, b| a.score().rl.total_cmp(&b.score().rl))
        .unwrap_or_default()
}

/// Best score per measure over several references.
pub fn rouge_multi(prediction: &str, references: &[&str]) -> RougeScore {
    references.iter().map(|r| rouge(prediction, r)).fold(
        RougeScore { r1: 0.0, r2: 0.0, rl: 0.0 },
        |a, b| RougeScore {
            r1: a.r1.max(b.r1),
            r2: a.r2.max(b.r2),
            rl: a.rl.max(b.rl),
        },
    )
}
