//! Tokenization and rule-based sentence segmentation.
//!
//! Tokens follow Unicode word boundaries with every punctuation mark as its
//! own token; whitespace is never a token; it is recovered from offsets.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use unicode_segmentation::UnicodeSegmentation;

/// A token borrowed from its source text, with byte offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token<'a> {
    pub text: &'a str,
    pub start: usize,
    pub end: usize,
}

impl Token<'_> {
    pub fn is_punctuation(&self) -> bool {
        self.text.chars().all(|c| !c.is_alphanumeric())
    }

    pub fn is_word(&self) -> bool {
        self.text.chars().any(char::is_alphabetic)
    }
}

/// Splits `text` on Unicode word boundaries, dropping whitespace-only segments.
pub fn tokenize(text: &str) -> Vec<Token<'_>> {
    text.split_word_bound_indices()
        .filter(|(_, s)| !s.chars().all(char::is_whitespace))
        .map(|(start, s)| Token {
            text: s,
            start,
            end: start + s.len(),
        })
        .collect()
}

/// Lowercased token strings, the normalization used by the n-gram metrics.
pub fn normalized_tokens(text: &str) -> Vec<String> {
    tokenize(text).iter().map(|t| t.text.to_lowercase()).collect()
}

/// Byte-to-character offset conversion for one string.
#[derive(Debug, Clone)]
pub struct CharMap {
    // char_starts[i] = byte offset of the i-th char; last entry = len
    char_starts: Vec<usize>,
}

impl CharMap {
    pub fn new(text: &str) -> Self {
        let mut char_starts: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        char_starts.push(text.len());
        CharMap { char_starts }
    }

    pub fn char_len(&self) -> usize {
        self.char_starts.len() - 1
    }

    /// Character offset of a byte offset that lies on a char boundary.
    pub fn to_char(&self, byte: usize) -> usize {
        match self.char_starts.binary_search(&byte) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        }
    }

    /// Byte offset of a character offset; `None` when out of range.
    pub fn to_byte(&self, ch: usize) -> Option<usize> {
        self.char_starts.get(ch).copied()
    }

    pub fn char_range(&self, bytes: Range<usize>) -> Range<usize> {
        self.to_char(bytes.start)..self.to_char(bytes.end)
    }
}

/// A sentence inside a document. Ranges exclude surrounding whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceSpan {
    pub text: String,
    pub char_range: Range<usize>,
    pub byte_range: Range<usize>,
    pub paragraph_index: usize,
}

/// Abbreviations whose trailing period never ends a sentence.
pub const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs", "e.g", "i.e", "cf", "fig", "figs",
    "eq", "eqs", "vol", "pp", "al", "approx", "dept", "est", "inc", "ltd", "co", "corp", "jan",
    "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec", "u.s", "u.k",
    "gen", "col", "lt", "sgt", "rev", "hon", "mt", "ft", "sec", "ch", "resp", "viz",
];

/// Version tag of the segmentation rules; recorded alongside extracted corpora.
pub const SEGMENTER_VERSION: &str = "rules-v1";

/// Byte ranges of paragraphs: maximal runs separated by blank lines, trimmed.
pub fn paragraph_ranges(text: &str) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut para_start: Option<usize> = None;
    let mut last_content_end = 0;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            if let Some(s) = para_start.take() {
                out.push(s..last_content_end);
            }
        } else {
            let lead = line.len() - line.trim_start().len();
            if para_start.is_none() {
                para_start = Some(offset + lead);
            }
            last_content_end = offset + line.trim_end().len();
        }
        offset += line.len();
    }
    if let Some(s) = para_start {
        out.push(s..last_content_end);
    }
    out
}

/// Rule-based sentence splitter with an abbreviation guard.
pub fn segment_sentences(document: &str) -> Vec<SentenceSpan> {
    let map = CharMap::new(document);
    let mut spans = Vec::new();
    for (pi, para) in paragraph_ranges(document).into_iter().enumerate() {
        let mut line_start = para.start;
        for line in document[para.clone()].split_inclusive('\n') {
            let abs = line_start..line_start + line.len();
            line_start += line.len();
            for r in split_line(document, abs) {
                spans.push(SentenceSpan {
                    text: document[r.clone()].to_string(),
                    char_range: map.char_range(r.clone()),
                    byte_range: r,
                    paragraph_index: pi,
                });
            }
        }
    }
    spans
}

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | '…')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '}' | '”' | '’' | '»')
}

fn split_line(doc: &str, line: Range<usize>) -> Vec<Range<usize>> {
    let text = &doc[line.clone()];
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let (b, c) = chars[i];
        if !is_terminal(c) {
            i += 1;
            continue;
        }
        let mut j = i;
        while j < chars.len() && is_terminal(chars[j].1) {
            j += 1;
        }
        let single_period = c == '.' && j == i + 1;
        while j < chars.len() && is_closer(chars[j].1) {
            j += 1;
        }
        let end_b = chars.get(j).map_or(text.len(), |&(bb, _)| bb);
        // must be followed by whitespace (or end of line)
        if j < chars.len() && !chars[j].1.is_whitespace() {
            i = j;
            continue;
        }
        let mut k = j;
        while k < chars.len() && chars[k].1.is_whitespace() {
            k += 1;
        }
        if k == chars.len() {
            break;
        }
        let next = chars[k].1;
        let guarded = single_period && abbreviation_before(&text[..b], &text[chars[k].0..]);
        if next.is_lowercase() || guarded {
            i = k;
            continue;
        }
        push_trimmed(&mut out, text, start..end_b, line.start);
        start = chars[k].0;
        i = k;
    }
    push_trimmed(&mut out, text, start..text.len(), line.start);
    out
}

fn push_trimmed(out: &mut Vec<Range<usize>>, text: &str, r: Range<usize>, base: usize) {
    let seg = &text[r.clone()];
    let lead = seg.len() - seg.trim_start().len();
    let body = seg.trim();
    if !body.is_empty() {
        let s = base + r.start + lead;
        out.push(s..s + body.len());
    }
}

pub(crate) fn abbreviation_before(before: &str, after: &str) -> bool {
    let word: String = before
        .chars()
        .rev()
        .take_while(|c| c.is_alphabetic() || *c == '.')
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    let word = word.trim_start_matches('.').to_lowercase();
    if word.is_empty() {
        return false;
    }
    if word == "no" || word == "nos" {
        return after.starts_with(|c: char| c.is_ascii_digit());
    }
    ABBREVIATIONS.contains(&word.as_str())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(doc: &str) -> Vec<String> {
        segment_sentences(doc).into_iter().map(|s| s.text).collect()
    }

    #[test]
    fn terminal_punctuation_splits() {
        assert_eq!(texts("A. B? C!"), vec!["A.", "B?", "C!"]);
    }

    #[test]
    fn abbreviation_guard() {
        assert_eq!(texts("Dr. Smith arrived."), vec!["Dr. Smith arrived."]);
        assert_eq!(texts("See No. 5 here. Then go."), vec!["See No. 5 here.", "Then go."]);
        assert_eq!(texts("The answer is no. Then stop."), vec!["The answer is no.", "Then stop."]);
    }

    #[test]
    fn empty_document() {
        assert!(segment_sentences("").is_empty());
        assert!(segment_sentences("  \n\n ").is_empty());
    }

    #[test]
    fn paragraphs_and_offsets() {
        let doc = "First one. Second one.\n\n  Third ünï.  \n";
        let spans = segment_sentences(doc);
        assert_eq!(spans.len(), 3);
        assert_eq!(spans[2].paragraph_index, 1);
        for s in &spans {
            assert_eq!(&doc[s.byte_range.clone()], s.text);
            let chars: String = doc
                .chars()
                .skip(s.char_range.start)
                .take(s.char_range.len())
                .collect();
            assert_eq!(chars, s.text);
        }
    }

    #[test]
    fn tokens_split_punctuation() {
        let toks: Vec<&str> = tokenize("She went to the markt.").iter().map(|t| t.text).collect();
        assert_eq!(toks, vec!["She", "went", "to", "the", "markt", "."]);
    }

    #[test]
    fn char_map_round_trip() {
        let s = "aé b";
        let m = CharMap::new(s);
        assert_eq!(m.char_len(), 4);
        assert_eq!(m.to_char(3), 2);
        assert_eq!(m.to_byte(2), Some(3));
        assert_eq!(m.to_byte(4), Some(5));
        assert_eq!(m.to_byte(5), None);
    }
}
