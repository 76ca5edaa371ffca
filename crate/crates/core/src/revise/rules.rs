//! A deterministic rule-based reviser: quote normalization, double-space
//! collapse, duplicated-word removal, sentence capitalization and user
//! regex substitutions, applied in that order.

use std::sync::LazyLock;

use regex::Regex;

use super::{ReviseError, Reviser};
use crate::corpus::{EditAction, EditIntention, EditOp, Granularity, LabeledAction};
use crate::text::{abbreviation_before, CharMap};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleConfig {
    pub quotes: bool,
    pub double_spaces: bool,
    pub duplicate_words: bool,
    pub capitalization: bool,
    /// `(pattern, replacement)`, replacement in `regex` syntax (`$1`).
    pub substitutions: Vec<(String, String)>,
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig {
            quotes: true,
            double_spaces: true,
            duplicate_words: true,
            capitalization: true,
            substitutions: Vec::new(),
        }
    }
}

/// One rule firing. Offsets refer to the text as it was before that rule ran.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleApplication {
    pub rule: String,
    pub action: LabeledAction,
}

#[derive(Debug, Clone)]
pub struct RuleReviser {
    config: RuleConfig,
    substitutions: Vec<(Regex, String)>,
}

// legitimately doubled words
const DOUBLING_OK: &[&str] = &["had", "that"];

impl RuleReviser {
    /// Compiles the substitutions. A pattern that matches its own
    /// replacement would keep firing, so it is rejected.
    pub fn new(config: RuleConfig) -> Result<Self, ReviseError> {
        let mut substitutions = Vec::new();
        for (p, r) in &config.substitutions {
            let re = Regex::new(p).map_err(|e| ReviseError::InvalidRuleConfig(format!("{p:?}: {e}")))?;
            if re.is_match("") {
                return Err(ReviseError::InvalidRuleConfig(format!("{p:?} matches the empty string")));
            }
            if !r.contains('$') && re.is_match(r) {
                return Err(ReviseError::InvalidRuleConfig(format!("{p:?} matches its own replacement {r:?}")));
            }
            substitutions.push((re, r.clone()));
        }
        Ok(RuleReviser { config, substitutions })
    }

    /// Revised text and every rule application, in order.
    pub fn apply(&self, text: &str) -> (String, Vec<RuleApplication>) {
        let mut log = Vec::new();
        let mut cur = text.to_string();
        if self.config.quotes {
            cur = run_rule("quotes", &cur, quote_fixes(&cur), &mut log);
        }
        if self.config.double_spaces {
            cur = run_rule("double-space", &cur, double_space_fixes(&cur), &mut log);
        }
        if self.config.duplicate_words {
            cur = run_rule("duplicate-word", &cur, duplicate_fixes(&cur), &mut log);
        }
        if self.config.capitalization {
            cur = run_rule("capitalization", &cur, capitalization_fixes(&cur), &mut log);
        }
        for (i, (re, rep)) in self.substitutions.iter().enumerate() {
            let fixes: Vec<Fix> = re
                .captures_iter(&cur)
                .map(|c| {
                    let m = c.get(0).unwrap();
                    let mut out = String::new();
                    c.expand(rep, &mut out);
                    (m.start()..m.end(), out)
                })
                .collect();
            cur = run_rule(&format!("regex-{}", i + 1), &cur, fixes, &mut log);
        }
        (cur, log)
    }
}

impl Reviser for RuleReviser {
    fn name(&self) -> &str {
        "rules"
    }

    fn revise(&self, document: &str, _: Option<&[EditIntention]>, _: u32) -> Result<String, ReviseError> {
        Ok(self.apply(document).0)
    }
}

/// Byte range and its replacement; ranges are sorted and disjoint.
type Fix = (std::ops::Range<usize>, String);

fn run_rule(rule: &str, text: &str, fixes: Vec<Fix>, log: &mut Vec<RuleApplication>) -> String {
    if fixes.is_empty() {
        return text.to_string();
    }
    let map = CharMap::new(text);
    let mut out = String::with_capacity(text.len());
    let mut last = 0;
    let mut out_chars = 0usize;
    for (r, rep) in fixes {
        if text[r.clone()] == rep {
            continue;
        }
        out.push_str(&text[last..r.start]);
        out_chars += text[last..r.start].chars().count();
        let src = map.char_range(r.clone());
        let original = text[r.clone()].to_string();
        let n = rep.chars().count();
        let op = EditOp::from_spans(&original, &rep).unwrap_or(EditOp::Modify);
        log.push(RuleApplication {
            rule: rule.to_string(),
            action: LabeledAction::labeled(
                EditAction {
                    op,
                    granularity: Granularity::SentenceLevel,
                    original,
                    revised: rep.clone(),
                    src_range: src,
                    tgt_range: out_chars..out_chars + n,
                    sentence_index: None,
                    paragraph_index: None,
                },
                EditIntention::Fluency,
            ),
        });
        out.push_str(&rep);
        out_chars += n;
        last = r.end;
    }
    out.push_str(&text[last..]);
    out
}

fn quote_fixes(text: &str) -> Vec<Fix> {
    text.char_indices()
        .filter_map(|(i, c)| {
            let rep = match c {
                '“' | '”' | '„' | '‟' | '«' | '»' => "\"",
                '‘' | '’' | '‚' | '‛' => "'",
                _ => return None,
            };
            Some((i..i + c.len_utf8(), rep.to_string()))
        })
        .collect()
}

fn double_space_fixes(text: &str) -> Vec<Fix> {
    static RUN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[ \t]{2,}").unwrap());
    RUN.find_iter(text).map(|m| (m.range(), " ".to_string())).collect()
}

/// Repeats of a word separated only by spaces or tabs; the first copy stays.
fn duplicate_fixes(text: &str) -> Vec<Fix> {
    static WORD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\p{L}+(?:['’]\p{L}+)*").unwrap());
    let words: Vec<(usize, usize)> = WORD.find_iter(text).map(|m| (m.start(), m.end())).collect();
    let mut fixes = Vec::new();
    let mut i = 0;
    while i < words.len() {
        let (s, e) = words[i];
        let w = text[s..e].to_lowercase();
        let mut j = i + 1;
        while j < words.len() {
            let gap = &text[words[j - 1].1..words[j].0];
            let same = text[words[j].0..words[j].1].to_lowercase() == w;
            if !same || gap.is_empty() || !gap.chars().all(|c| c == ' ' || c == '\t') {
                break;
            }
            j += 1;
        }
        if j > i + 1 && !DOUBLING_OK.contains(&w.as_str()) {
            fixes.push((s..words[j - 1].1, text[s..e].to_string()));
        }
        i = j;
    }
    fixes
}

/// Lowercase letters opening a sentence: at the start of a line, or after
/// `.`, `!` or `?` (plus closing quotes) and whitespace, unless the period
/// ends an abbreviation or belongs to an ellipsis.
fn capitalization_fixes(text: &str) -> Vec<Fix> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut fixes = Vec::new();
    let mut open = true;
    let mut need_space = false;
    for (k, &(i, c)) in chars.iter().enumerate() {
        if c == '\n' {
            open = true;
            need_space = false;
        } else if c.is_whitespace() {
            need_space = false;
        } else if matches!(c, '.' | '!' | '?') {
            let prev = k.checked_sub(1).map(|p| chars[p].1);
            let next = chars.get(k + 1).map(|x| x.1);
            let ellipsis = c == '.' && (prev == Some('.') || next == Some('.'));
            let abbrev = c == '.' && (abbreviation_before(&text[..i], &text[i + 1..]) || is_initial(&text[..i]));
            open = !(ellipsis || abbrev);
            need_space = open;
        } else if open && need_space {
            open = matches!(c, '"' | '\'' | ')' | ']' | '”' | '’' | '»');
        } else if open && c.is_alphanumeric() {
            if c.is_lowercase() {
                let mut up = c.to_uppercase();
                if let (Some(u), None) = (up.next(), up.next()) {
                    fixes.push((i..i + c.len_utf8(), u.to_string()));
                }
            }
            open = false;
        }
    }
    fixes
}

/// A lone letter before the period, as in "J. Smith" or "e.g".
fn is_initial(before: &str) -> bool {
    let mut it = before.chars().rev();
    match (it.next(), it.next()) {
        (Some(a), None) => a.is_alphabetic(),
        (Some(a), Some(b)) => a.is_alphabetic() && !b.is_alphanumeric(),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rules() -> RuleReviser {
        RuleReviser::new(RuleConfig::default()).unwrap()
    }

    #[test]
    fn duplicate_word_is_one_fluency_modify() {
        let (out, log) = rules().apply("the the cat");
        assert_eq!(out, "The cat");
        let dup: Vec<_> = log.iter().filter(|a| a.rule == "duplicate-word").collect();
        assert_eq!(dup.len(), 1);
        assert_eq!(dup[0].action.intention, Some(EditIntention::Fluency));
        let only_dup = RuleReviser::new(RuleConfig {
            capitalization: false,
            ..RuleConfig::default()
        })
        .unwrap();
        let (out, log) = only_dup.apply("the the cat");
        assert_eq!(out, "the cat");
        assert_eq!(log.len(), 1);
        assert_eq!(log[0].action.action.op, EditOp::Modify);
        assert_eq!((log[0].action.action.original.as_str(), log[0].action.action.revised.as_str()), ("the the", "the"));
    }

    #[test]
    fn clean_text_unchanged() {
        let t = "The cat sat. Dr. Smith, e.g. the vet, came.\n\nA new paragraph.";
        let (out, log) = rules().apply(t);
        assert_eq!(out, t);
        assert!(log.is_empty());
    }

    #[test]
    fn all_families() {
        let (out, _) = rules().apply("“Hello”  world. it is is fine. had had enough");
        assert_eq!(out, "\"Hello\" world. It is fine. Had had enough");
    }

    #[test]
    fn self_matching_substitution_rejected() {
        let bad = RuleConfig {
            substitutions: vec![("a+".into(), "aa".into())],
            ..RuleConfig::default()
        };
        assert!(matches!(RuleReviser::new(bad), Err(ReviseError::InvalidRuleConfig(_))));
        let broken = RuleConfig {
            substitutions: vec![("(".into(), "x".into())],
            ..RuleConfig::default()
        };
        assert!(RuleReviser::new(broken).is_err());
    }
}
