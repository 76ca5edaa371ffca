//! Hand-built features of one edit action in its local context.

use std::collections::HashMap;

use crate::corpus::{EditAction, EditOp, Granularity};
use crate::diff::lcs_ratio;
use crate::metrics::distance::levenshtein;
use crate::text::{paragraph_ranges, tokenize, CharMap};

pub const FEATURE_SCHEMA_VERSION: &str = "edit-features-v1";

pub const FEATURE_NAMES: &[&str] = &[
    "length_delta",
    "char_distance",
    "case_change",
    "punctuation_only",
    "op_insert",
    "op_delete",
    "op_modify",
    "token_overlap",
    "function_word_change",
    "position_begin",
    "position_middle",
    "position_end",
    "granularity_sentence",
    "granularity_paragraph",
    "granularity_document",
    "named_token_change",
    "log_src_tokens",
    "log_tgt_tokens",
    "novel_word_ratio",
    "whitespace_only",
];

const FUNCTION_WORDS: &[&str] = &[
    "a", "an", "the", "and", "or", "but", "of", "to", "in", "on", "at", "by", "for", "with", "from", "as",
    "is", "are", "was", "were", "be", "been", "being", "it", "its", "this", "that", "these", "those",
    "which", "who", "whom", "whose", "there", "their", "they", "he", "she", "we", "you", "i", "his", "her",
    "our", "not", "no", "so", "if", "then", "than", "also", "however", "thus", "therefore", "moreover",
    "furthermore", "although", "while", "because", "since", "into", "onto", "has", "have", "had", "do",
    "does", "did", "can", "could", "will", "would", "may", "might", "should", "must", "such",
];

#[derive(Debug, Clone, PartialEq)]
pub struct EditFeatures(pub Vec<f64>);

fn multiset<'a>(toks: &[&'a str]) -> HashMap<&'a str, i64> {
    let mut m = HashMap::new();
    for t in toks {
        *m.entry(*t).or_insert(0) += 1;
    }
    m
}

/// Tokens in the multiset symmetric difference of `a` and `b`.
fn changed_tokens<'a>(a: &[&'a str], b: &[&'a str]) -> Vec<&'a str> {
    let ma = multiset(a);
    let mb = multiset(b);
    let mut out = Vec::new();
    for (t, &ca) in &ma {
        let cb = mb.get(t).copied().unwrap_or(0);
        for _ in 0..(ca - cb).max(0) {
            out.push(*t);
        }
    }
    for (t, &cb) in &mb {
        let ca = ma.get(t).copied().unwrap_or(0);
        for _ in 0..(cb - ca).max(0) {
            out.push(*t);
        }
    }
    out.sort_unstable();
    out
}

fn is_named(t: &str) -> bool {
    t.chars().next().is_some_and(|c| c.is_uppercase() || c.is_ascii_digit())
}

/// Features of `action` against the document it edits.
pub fn extract_features(action: &EditAction, source_text: &str) -> EditFeatures {
    let o = &action.original;
    let r = &action.revised;
    let ot: Vec<&str> = tokenize(o).into_iter().map(|t| t.text).collect();
    let rt: Vec<&str> = tokenize(r).into_iter().map(|t| t.text).collect();
    let oc: Vec<char> = o.chars().collect();
    let rc: Vec<char> = r.chars().collect();
    let changed = changed_tokens(&ot, &rt);

    let case_change = o != r && o.to_lowercase() == r.to_lowercase();
    let visible: Vec<char> = oc.iter().chain(rc.iter()).copied().filter(|c| !c.is_whitespace()).collect();
    let punctuation_only = !visible.is_empty() && visible.iter().all(|c| !c.is_alphanumeric());
    let whitespace_only = visible.is_empty();
    let overlap = if ot.is_empty() && rt.is_empty() { 1.0 } else { lcs_ratio(&ot, &rt) };
    let function_change = if changed.is_empty() {
        0.0
    } else {
        changed.iter().filter(|t| FUNCTION_WORDS.contains(&t.to_lowercase().as_str())).count() as f64 / changed.len() as f64
    };
    let named_change = {
        let on: Vec<&str> = ot.iter().skip(1).copied().filter(|t| is_named(t)).collect();
        let rn: Vec<&str> = rt.iter().skip(1).copied().filter(|t| is_named(t)).collect();
        !changed_tokens(&on, &rn).is_empty() || changed.iter().any(|t| t.chars().any(|c| c.is_ascii_digit()))
    };

    // position of the edit within the source document
    let map = CharMap::new(source_text);
    let len = map.char_len().max(1) as f64;
    let rel = action.src_range.start as f64 / len;
    let bucket = if rel < 1.0 / 3.0 { 0 } else if rel < 2.0 / 3.0 { 1 } else { 2 };

    // local context: the containing source paragraph
    let start_byte = map.to_byte(action.src_range.start.min(map.char_len())).unwrap_or(source_text.len());
    let context = paragraph_ranges(source_text)
        .into_iter()
        .find(|p| p.start <= start_byte && start_byte <= p.end)
        .map_or(source_text, |p| &source_text[p]);
    let ctx_words: Vec<String> = tokenize(context).iter().map(|t| t.text.to_lowercase()).collect();
    let rev_words: Vec<String> = rt.iter().filter(|t| t.chars().any(char::is_alphabetic)).map(|t| t.to_lowercase()).collect();
    let novel = if rev_words.is_empty() {
        0.0
    } else {
        rev_words.iter().filter(|w| !ctx_words.contains(w)).count() as f64 / rev_words.len() as f64
    };

    let b = |x: bool| f64::from(u8::from(x));
    EditFeatures(vec![
        rt.len() as f64 - ot.len() as f64,
        levenshtein(&oc, &rc) as f64,
        b(case_change),
        b(punctuation_only),
        b(action.op == EditOp::Insert),
        b(action.op == EditOp::Delete),
        b(action.op == EditOp::Modify),
        overlap,
        function_change,
        b(bucket == 0),
        b(bucket == 1),
        b(bucket == 2),
        b(action.granularity == Granularity::SentenceLevel),
        b(action.granularity == Granularity::ParagraphLevel),
        b(action.granularity == Granularity::DocumentLevel),
        b(named_change),
        (ot.len() as f64).ln_1p(),
        (rt.len() as f64).ln_1p(),
        novel,
        b(whitespace_only),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn action(op: EditOp, o: &str, r: &str) -> EditAction {
        EditAction {
            op,
            granularity: Granularity::SentenceLevel,
            original: o.into(),
            revised: r.into(),
            src_range: 0..o.chars().count(),
            tgt_range: 0..r.chars().count(),
            sentence_index: None,
            paragraph_index: None,
        }
    }

    #[test]
    fn case_change_flag() {
        let f = extract_features(&action(EditOp::Modify, "The", "the"), "The cat.");
        assert_eq!(f.0.len(), FEATURE_NAMES.len());
        assert_eq!(f.0[2], 1.0);
        assert_eq!(f.0[3], 0.0);
    }

    #[test]
    fn ratios_bounded() {
        let f = extract_features(&action(EditOp::Insert, "", "and the new Results 42"), "Some text here.");
        for i in [7, 8, 18] {
            assert!((0.0..=1.0).contains(&f.0[i]));
        }
        assert_eq!(f.0[15], 1.0);
    }
}
