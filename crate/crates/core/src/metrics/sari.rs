//! SARI with its ADD, DEL and KEEP components.
//!
//! Per n-gram order, KEEP and ADD are F1 scores and DEL is precision only.
//! Source and prediction counts are scaled by the number of references so
//! they compare with counts pooled over all references. An empty ratio
//! (0/0) scores 0, which gives an unedited prediction ADD = DEL = 0.

use std::collections::{HashMap, HashSet};

use super::{ngrams, MetricError};
use crate::text::normalized_tokens;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SariScore {
    pub sari: f64,
    pub add: f64,
    pub del: f64,
    pub keep: f64,
}

fn counts<'a>(grams: &'a [Vec<&'a str>]) -> HashMap<&'a [&'a str], usize> {
    let mut m = HashMap::new();
    for g in grams {
        *m.entry(g.as_slice()).or_insert(0) += 1;
    }
    m
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// (keep F1, deletion precision, add F1) for one n-gram order.
fn sari_order(src: &[&str], pred: &[&str], refs: &[Vec<&str>], n: usize) -> (f64, f64, f64) {
    let r = refs.len();
    let sg = ngrams(src, n);
    let cg = ngrams(pred, n);
    let rg: Vec<Vec<&str>> = refs.iter().flat_map(|t| ngrams(t, n)).collect();
    let s = counts(&sg);
    let c = counts(&cg);
    let rc = counts(&rg);
    let get = |m: &HashMap<&[&str], usize>, g: &[&str]| m.get(g).copied().unwrap_or(0);

    // keep
    let (mut p_sum, mut p_n, mut r_sum, mut r_n) = (0.0, 0usize, 0.0, 0usize);
    for (&g, &sc) in &s {
        let keep = (sc * r).min(get(&c, g) * r);
        let all = (sc * r).min(get(&rc, g));
        let good = keep.min(get(&rc, g));
        if keep > 0 {
            p_sum += good as f64 / keep as f64;
            p_n += 1;
        }
        if all > 0 {
            r_sum += good as f64 / all as f64;
            r_n += 1;
        }
    }
    let keep = f1(ratio(p_sum, p_n as f64), ratio(r_sum, r_n as f64));

    // deletion
    let (mut d_sum, mut d_n) = (0.0, 0usize);
    for (&g, &sc) in &s {
        let del = (sc * r).saturating_sub(get(&c, g) * r);
        if del > 0 {
            let all = (sc * r).saturating_sub(get(&rc, g));
            d_sum += del.min(all) as f64 / del as f64;
            d_n += 1;
        }
    }
    let del = ratio(d_sum, d_n as f64);

    // addition, over n-gram types
    let added: HashSet<&[&str]> = c.keys().filter(|g| !s.contains_key(*g)).copied().collect();
    let wanted: HashSet<&[&str]> = rc.keys().filter(|g| !s.contains_key(*g)).copied().collect();
    let good = added.intersection(&wanted).count() as f64;
    let add = f1(ratio(good, added.len() as f64), ratio(good, wanted.len() as f64));
    (keep, del, add)
}

pub fn sari_tokens(src: &[&str], pred: &[&str], refs: &[Vec<&str>]) -> Result<SariScore, MetricError> {
    if refs.is_empty() {
        return Err(MetricError::EmptyReferences);
    }
    let (mut k, mut d, mut a) = (0.0, 0.0, 0.0);
    for n in 1..=4 {
        let (kn, dn, an) = sari_order(src, pred, refs, n);
        k += kn;
        d += dn;
        a += an;
    }
    let (keep, del, add) = (100.0 * k / 4.0, 100.0 * d / 4.0, 100.0 * a / 4.0);
    Ok(SariScore {
        sari: (keep + del + add) / 3.0,
        add,
        del,
        keep,
    })
}

/// Sentence-level SARI on lowercased, punctuation-split tokens.
pub fn sari(source: &str, prediction: &str, references: &[&str]) -> Result<SariScore, MetricError> {
    let s = normalized_tokens(source);
    let p = normalized_tokens(prediction);
    let r: Vec<Vec<String>> = references.iter().map(|t| normalized_tokens(t)).collect();
    let sv: Vec<&str> = s.iter().map(String::as_str).collect();
    let pv: Vec<&str> = p.iter().map(String::as_str).collect();
    let rv: Vec<Vec<&str>> = r.iter().map(|t| t.iter().map(String::as_str).collect()).collect();
    sari_tokens(&sv, &pv, &rv)
}
