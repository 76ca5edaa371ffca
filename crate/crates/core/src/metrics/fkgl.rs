//! Flesch–Kincaid grade level and the syllable heuristic behind it.

use super::MetricError;
use crate::text::{segment_sentences, tokenize};

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u' | b'y')
}

/// Vowel-group syllable estimate with silent-e and suffix corrections.
/// Returns 0 for tokens without letters.
pub fn syllables(word: &str) -> usize {
    let w: Vec<u8> = word
        .chars()
        .filter(char::is_ascii_alphabetic)
        .map(|c| c.to_ascii_lowercase() as u8)
        .collect();
    if w.is_empty() {
        return if word.chars().any(char::is_alphabetic) { 1 } else { 0 };
    }
    let n = w.len();
    let mut count = 0i32;
    let mut prev_vowel = false;
    for (i, &c) in w.iter().enumerate() {
        // word-initial y is a consonant
        let v = is_vowel(c) && !(c == b'y' && i == 0);
        if v && !prev_vowel {
            count += 1;
        }
        prev_vowel = v;
    }
    let ends = |s: &str| w.ends_with(s.as_bytes());
    let consonant_at = |i: usize| !is_vowel(w[i]);

    // silent final e, except consonant + "le"
    if n > 2 && w[n - 1] == b'e' && consonant_at(n - 2) && !(w[n - 2] == b'l' && consonant_at(n - 3)) {
        count -= 1;
    }
    // -ed after anything but t/d, -es after anything but sibilants
    if n > 3 && ends("ed") && consonant_at(n - 3) && !matches!(w[n - 3], b't' | b'd') {
        count -= 1;
    }
    if n > 3 && ends("es") && consonant_at(n - 3) && !matches!(w[n - 3], b's' | b'x' | b'z' | b'c' | b'g') && !ends("ches") && !ends("shes")
        && !(w[n - 3] == b'l' && consonant_at(n - 4))
    {
        count -= 1;
    }
    // silent e inside common suffixes
    for suf in ["ely", "ement", "eful", "eness", "eless"] {
        if ends(suf) && n > suf.len() + 1 && consonant_at(n - suf.len() - 1) {
            count -= 1;
        }
    }
    // hiatus vowels that form two syllables
    for i in 0..n.saturating_sub(1) {
        let pair = (w[i], w[i + 1]);
        let before = if i > 0 { w[i - 1] } else { b' ' };
        let split = match pair {
            (b'i', b'a') | (b'i', b'o') | (b'i', b'u') => !matches!(before, b't' | b's' | b'c' | b'x' | b'g' | b'l'),
            (b'u', b'a') | (b'u', b'o') => !matches!(before, b'q' | b'g'),
            (b'e', b'o') | (b'y', b'i') => true,
            (b'e', b'a') => i + 2 == n || (i + 3 == n && w[n - 1] == b's'),
            _ => false,
        };
        if split {
            count += 1;
        }
    }
    count.max(1) as usize
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadabilityCounts {
    pub sentences: usize,
    pub words: usize,
    pub syllables: usize,
}

pub fn readability_counts(document: &str) -> ReadabilityCounts {
    let sentences = segment_sentences(document).len();
    let words: Vec<usize> = tokenize(document)
        .iter()
        .filter(|t| t.is_word())
        .map(|t| syllables(t.text))
        .collect();
    ReadabilityCounts {
        sentences,
        words: words.len(),
        syllables: words.iter().sum(),
    }
}

pub fn fkgl_from_counts(c: ReadabilityCounts) -> f64 {
    0.39 * (c.words as f64 / c.sentences as f64) + 11.8 * (c.syllables as f64 / c.words as f64) - 15.59
}

/// Grade level; lower is more readable.
pub fn fkgl(document: &str) -> Result<f64, MetricError> {
    let c = readability_counts(document);
    if c.sentences == 0 || c.words == 0 {
        return Err(MetricError::EmptyDocument);
    }
    Ok(fkgl_from_counts(c))
}
