//! Seeded synthetic documents and mutations, used by fuzz tests and to build
//! the vendored fixture corpus.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::text::{paragraph_ranges, segment_sentences, tokenize};

pub const SEED_PARAGRAPHS: &[&str] = &[
    "The system was designed for English. It splits long sentences into shorter ones and keeps the meaning intact.",
    "We propose a new method for text revision. Our method learns from human edits. Experiments on three domains show consistent gains.",
    "She went to the markt. It was closed on Sunday, so she went home.",
    "The company announced its results on Monday. Revenue grew by 3.5 percent, e.g. in the retail segment. Analysts were surprised.",
    "Dr. Smith arrived late to the meeting. He apologized and presented the new budget.",
    "Café owners in Zürich reported fewer tourists this year. Prices, however, kept rising.",
    "In this paper, we study iterative revision. Writers rarely finish a document in one pass.\n\nWe collect revisions from three domains. Each revision is annotated with an intention.",
    "The model is trained on a large corpus. It is then fine-tuned on labeled edits. Finally, we evaluate it with automatic metrics and human judgments.",
];

const VOCAB: &[&str] = &[
    "new", "model", "the", "a", "significantly", "however", "data", "results", "was", "were", "very",
    "approach", "text", "quickly", "simple", "robust", "also", "paper", "revision", "Moreover", ",",
    "(", ")", "and", "écrit",
];

const EXTRA_SENTENCES: &[&str] = &[
    "Nevertheless, it was currently applied for Brazilian Portuguese.",
    "This is a completely new sentence.",
    "Further experiments are left for future work.",
    "The authors thank the reviewers.",
];

/// Applies `1..=max_ops` random token- or sentence-level mutations. The
/// result may equal the input when every mutation is a no-op.
pub fn mutate<R: Rng>(rng: &mut R, doc: &str, max_ops: usize) -> String {
    let mut out = doc.to_string();
    let ops = rng.random_range(1..=max_ops.max(1));
    for _ in 0..ops {
        out = mutate_once(rng, &out);
    }
    out
}

fn mutate_once<R: Rng>(rng: &mut R, doc: &str) -> String {
    let toks = tokenize(doc);
    let word = *VOCAB.choose(rng).unwrap();
    if toks.is_empty() {
        return format!("{doc}{word}");
    }
    let t = toks[rng.random_range(0..toks.len())];
    let splice = |r: std::ops::Range<usize>, with: &str| format!("{}{}{}", &doc[..r.start], with, &doc[r.end..]);
    match rng.random_range(0..10) {
        0 => splice(t.start..t.end, ""),
        1 => splice(t.start..t.start, &format!("{word} ")),
        2 => splice(t.start..t.end, word),
        3 => {
            let mut c = t.text.chars();
            let first = c.next().unwrap();
            let flipped: String = if first.is_uppercase() {
                first.to_lowercase().chain(c).collect()
            } else {
                first.to_uppercase().chain(c).collect()
            };
            splice(t.start..t.end, &flipped)
        }
        4 => match doc[t.end..].find(' ') {
            Some(p) => splice(t.end + p..t.end + p + 1, "  "),
            None => splice(t.end..t.end, " x"),
        },
        5 => {
            let sents = segment_sentences(doc);
            let s = &sents[rng.random_range(0..sents.len())];
            let extra = EXTRA_SENTENCES.choose(rng).unwrap();
            splice(s.byte_range.end..s.byte_range.end, &format!(" {extra}"))
        }
        6 => {
            let sents = segment_sentences(doc);
            if sents.len() < 2 {
                return doc.to_string();
            }
            let s = &sents[rng.random_range(0..sents.len())];
            splice(s.byte_range.clone(), "")
        }
        7 => {
            let paras = paragraph_ranges(doc);
            let p = &paras[rng.random_range(0..paras.len())];
            let extra = EXTRA_SENTENCES.choose(rng).unwrap();
            splice(p.end..p.end, &format!("\n\n{extra} {word} here."))
        }
        8 => {
            let i = rng.random_range(0..toks.len());
            if i + 1 >= toks.len() {
                return doc.to_string();
            }
            let (a, b) = (toks[i], toks[i + 1]);
            format!("{}{}{}{}{}", &doc[..a.start], b.text, &doc[a.end..b.start], a.text, &doc[b.end..])
        }
        _ => {
            // multi-token phrase rewrite
            let i = rng.random_range(0..toks.len());
            let j = (i + rng.random_range(1..4)).min(toks.len() - 1);
            splice(toks[i].start..toks[j].end, &format!("{word} {}", VOCAB.choose(rng).unwrap()))
        }
    }
}
