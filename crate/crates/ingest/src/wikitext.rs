//! Best-effort wikitext to plain prose. References, templates, tables,
//! external links and category/file links are removed; internal links are
//! unwrapped; paragraphs are separated by one blank line.

use std::sync::LazyLock;

use regex::Regex;

static COMMENT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?s)<!--.*?-->").unwrap());
static REF_SELF: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)<ref\b[^>]*/>").unwrap());
static REF_PAIR: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?is)<ref\b[^>]*>.*?</ref\s*>").unwrap());
static REF_OPEN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)<ref\b[^>]*>").unwrap());
static DROP_BLOCKS: LazyLock<Vec<Regex>> = LazyLock::new(|| {
    ["math", "gallery", "timeline", "syntaxhighlight", "source", "score", "imagemap", "references"]
        .iter()
        .map(|t| Regex::new(&format!(r"(?is)<{t}\b[^>]*>.*?</{t}\s*>")).unwrap())
        .collect()
});
static EXTERNAL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\[(?:https?:|ftp:)?//[^\s\]]*(?:\s[^\]\n]*)?\]").unwrap());
static BARE_URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?:https?|ftp)://[^\s<>\]]+").unwrap());
static EMPHASIS: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"'{2,}").unwrap());
static BREAK: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)<br\s*/?>").unwrap());
static TAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"</?[a-zA-Z][a-zA-Z0-9]*(?:\s[^<>]*)?/?>").unwrap());
static SWITCH: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"__[A-Z]+__").unwrap());
static HEADING: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^=+.*=+$").unwrap());
static LIST: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[*#:;]+\s*").unwrap());
static EMPTY_PARENS: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\(\s*[,;]?\s*\)").unwrap());
static SPACES: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[ \t\u{a0}]+").unwrap());

const DROPPED_NAMESPACES: &[&str] = &["category", "file", "image", "media"];

/// Plain text of `raw`. Idempotent.
pub fn parse_wikitext(raw: &str) -> String {
    parse_wikitext_counted(raw).0
}

/// Plain text plus the number of unbalanced fragments that were dropped.
pub fn parse_wikitext_counted(raw: &str) -> (String, usize) {
    let mut dropped = 0;
    let mut cur = raw.replace("\r\n", "\n");
    // every change shortens the text, so this reaches a fixpoint
    for _ in 0..32 {
        let next = pass(&cur, &mut dropped);
        if next == cur {
            break;
        }
        cur = next;
    }
    if dropped > 0 {
        log::warn!("wikitext: dropped {dropped} unbalanced fragment(s)");
    }
    (cur, dropped)
}

fn pass(s: &str, dropped: &mut usize) -> String {
    let mut t = COMMENT.replace_all(s, "").into_owned();
    if let Some(i) = t.find("<!--") {
        t.truncate(i);
        *dropped += 1;
    }
    t = REF_SELF.replace_all(&t, "").into_owned();
    t = REF_PAIR.replace_all(&t, "").into_owned();
    if REF_OPEN.is_match(&t) {
        *dropped += REF_OPEN.find_iter(&t).count();
        t = REF_OPEN.replace_all(&t, "").into_owned();
    }
    for re in DROP_BLOCKS.iter() {
        t = re.replace_all(&t, "").into_owned();
    }
    t = strip_nested(&t, "{{", "}}", dropped, |_| String::new());
    t = strip_tables(&t, dropped);
    t = strip_nested(&t, "[[", "]]", dropped, link_text);
    t = EXTERNAL.replace_all(&t, "").into_owned();
    t = BARE_URL.replace_all(&t, "").into_owned();
    t = EMPHASIS.replace_all(&t, "").into_owned();
    t = BREAK.replace_all(&t, " ").into_owned();
    t = TAG.replace_all(&t, "").into_owned();
    t = SWITCH.replace_all(&t, "").into_owned();
    t = EMPTY_PARENS.replace_all(&t, "").into_owned();
    layout(&t)
}

/// Replaces each balanced `open … close` span by `f(inner)`. Unbalanced
/// openers are dropped and counted.
fn strip_nested(s: &str, open: &str, close: &str, dropped: &mut usize, f: impl Fn(&str) -> String) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(i) = rest.find(open) {
        out.push_str(&rest[..i]);
        let body = &rest[i + open.len()..];
        let mut depth = 1usize;
        let mut j = 0usize;
        let mut end = None;
        while j < body.len() {
            if body[j..].starts_with(open) {
                depth += 1;
                j += open.len();
            } else if body[j..].starts_with(close) {
                depth -= 1;
                if depth == 0 {
                    end = Some(j);
                    break;
                }
                j += close.len();
            } else {
                j += body[j..].chars().next().map_or(1, char::len_utf8);
            }
        }
        match end {
            Some(e) => {
                out.push_str(&f(&body[..e]));
                rest = &body[e + close.len()..];
            }
            None => {
                *dropped += 1;
                rest = body;
            }
        }
    }
    out.push_str(rest);
    out
}

fn link_text(inner: &str) -> String {
    let inner = inner.trim();
    let (target, label) = match inner.split_once('|') {
        Some((t, l)) => (t.trim(), Some(l)),
        None => (inner, None),
    };
    let bare = target.trim_start_matches(':');
    if let Some((ns, _)) = bare.split_once(':') {
        if DROPPED_NAMESPACES.contains(&ns.trim().to_lowercase().as_str()) {
            return String::new();
        }
    }
    match label {
        // a label may itself hold pipes (file captions); keep the last part
        Some(l) if !l.trim().is_empty() => l.rsplit('|').next().unwrap_or(l).trim().to_string(),
        _ => bare.to_string(),
    }
}

/// Removes `{| … |}` tables, which open and close at line starts.
fn strip_tables(s: &str, dropped: &mut usize) -> String {
    let mut out: Vec<&str> = Vec::new();
    let mut depth = 0usize;
    for line in s.split('\n') {
        let l = line.trim_start();
        if l.starts_with("{|") {
            depth += 1;
            continue;
        }
        if depth > 0 {
            if l.starts_with("|}") {
                depth -= 1;
                if depth == 0 {
                    // a table ends the paragraph around it
                    out.push("");
                }
            }
            continue;
        }
        out.push(line);
    }
    if depth > 0 {
        *dropped += 1;
    }
    out.join("\n")
}

/// Drops headings and list markers, collapses spaces, and joins paragraphs
/// with exactly one blank line.
fn layout(s: &str) -> String {
    let mut paragraphs: Vec<Vec<String>> = vec![Vec::new()];
    for line in s.split('\n') {
        let line = SPACES.replace_all(line, " ");
        let mut line = line.trim();
        let is_heading = HEADING.is_match(line);
        if is_heading || line.chars().all(|c| c == '-') {
            // headings and rules end the paragraph
            line = "";
        }
        let line = LIST.replace(line, "");
        let line = line.trim();
        if line.is_empty() {
            if !paragraphs.last().unwrap().is_empty() {
                paragraphs.push(Vec::new());
            }
        } else {
            paragraphs.last_mut().unwrap().push(line.to_string());
        }
    }
    paragraphs
        .into_iter()
        .filter(|p| !p.is_empty())
        .map(|p| p.join("\n"))
        .collect::<Vec<_>>()
        .join("\n\n")
}
