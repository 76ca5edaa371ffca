//! Present/absent entity grid coherence.

use std::collections::{BTreeMap, BTreeSet};

use crate::text::{segment_sentences, tokenize};

/// Score returned for documents that have no transitions to measure.
pub const NEUTRAL: f64 = 0.5;

const STOPWORDS: &[&str] = &[
    "the", "and", "for", "are", "but", "not", "you", "all", "any", "can", "had", "her", "was", "one", "our",
    "out", "has", "him", "his", "how", "its", "may", "new", "now", "old", "see", "two", "who", "did", "get",
    "let", "put", "say", "she", "too", "use", "this", "that", "with", "have", "from", "they", "will", "would",
    "there", "their", "what", "about", "which", "when", "make", "like", "time", "just", "know", "take",
    "into", "your", "some", "could", "them", "than", "then", "also", "these", "those", "were", "been",
    "being", "more", "most", "such", "very", "only", "over", "other", "each", "both", "many", "much",
    "well", "where", "while", "after", "before", "because", "through", "during", "under", "between",
    "however", "thus", "here", "does", "done", "should", "shall", "must", "might", "upon", "within",
    "without", "again", "same", "even", "still", "yet", "own", "any", "every", "further", "once", "why",
];

#[derive(Debug, Clone, PartialEq)]
pub struct EntityGrid {
    pub entities: Vec<String>,
    /// `cells[s][e]`: entity `e` mentioned in sentence `s`.
    pub cells: Vec<Vec<bool>>,
}

/// Transition counts indexed `[from][to]` with 0 = absent, 1 = present.
pub type TransitionCounts = [[usize; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridScore {
    pub score: f64,
    /// True when the neutral value was returned.
    pub neutral: bool,
}

/// Entity candidates: capitalized words not at sentence start, plus
/// non-stopword lowercase words that recur across sentences.
pub fn build_grid(document: &str) -> EntityGrid {
    let sentences: Vec<Vec<(String, bool, bool)>> = segment_sentences(document)
        .iter()
        .map(|s| {
            tokenize(&s.text)
                .iter()
                .enumerate()
                .filter(|(_, t)| t.text.chars().all(char::is_alphabetic))
                .map(|(i, t)| {
                    let cap = t.text.chars().next().is_some_and(char::is_uppercase);
                    (t.text.to_lowercase(), cap, i == 0)
                })
                .collect()
        })
        .collect();
    let mut entities = BTreeSet::new();
    let mut seen_in: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    for (si, toks) in sentences.iter().enumerate() {
        for (w, cap, initial) in toks {
            if *cap && !*initial {
                entities.insert(w.clone());
            } else if !*cap && w.chars().count() >= 3 && !STOPWORDS.contains(&w.as_str()) {
                seen_in.entry(w.clone()).or_default().insert(si);
            }
        }
    }
    entities.extend(seen_in.into_iter().filter(|(_, s)| s.len() >= 2).map(|(w, _)| w));
    let entities: Vec<String> = entities.into_iter().collect();
    let cells = sentences
        .iter()
        .map(|toks| entities.iter().map(|e| toks.iter().any(|(w, _, _)| w == e)).collect())
        .collect();
    EntityGrid { entities, cells }
}

impl EntityGrid {
    pub fn transitions(&self) -> TransitionCounts {
        let mut t = [[0usize; 2]; 2];
        for pair in self.cells.windows(2) {
            for e in 0..self.entities.len() {
                t[usize::from(pair[0][e])][usize::from(pair[1][e])] += 1;
            }
        }
        t
    }
}

/// `exp` of the mean log-probability of every transition, with transition
/// probabilities estimated from the same document.
pub fn score_transitions(t: &TransitionCounts) -> Option<f64> {
    let total: usize = t.iter().flatten().sum();
    if total == 0 {
        return None;
    }
    let mean_log: f64 = t
        .iter()
        .flatten()
        .filter(|&&c| c > 0)
        .map(|&c| c as f64 * (c as f64 / total as f64).ln())
        .sum::<f64>()
        / total as f64;
    Some(mean_log.exp())
}

pub fn entity_grid_score(document: &str) -> GridScore {
    let grid = build_grid(document);
    if grid.cells.len() < 2 {
        return GridScore {
            score: NEUTRAL,
            neutral: true,
        };
    }
    match score_transitions(&grid.transitions()) {
        Some(score) => GridScore { score, neutral: false },
        None => GridScore {
            score: NEUTRAL,
            neutral: true,
        },
    }
}
