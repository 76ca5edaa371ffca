//! Edit-action extraction between two document versions.
//!
//! Extraction works top-down: paragraphs are aligned monotonically, then
//! sentences inside aligned paragraphs, then tokens inside aligned sentences.
//! The token anchors from all levels partition both texts into regions; each
//! region becomes one or more actions whose character ranges tile the changed
//! text exactly, so applying them reproduces the target byte for byte.

use std::ops::Range;

use thiserror::Error;

use crate::corpus::{Domain, EditAction, EditOp, Granularity, LabeledAction, Revision};
use crate::text::{paragraph_ranges, segment_sentences, tokenize, CharMap, SentenceSpan, Token};

/// Default similarity a sentence pair needs to count as the same sentence.
pub const DEFAULT_ALIGN_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error("source and target texts are identical")]
    IdenticalTexts,
    #[error("action {index} does not match the source text: {reason}")]
    InconsistentOffsets { index: usize, reason: String },
}

// ---------------------------------------------------------------------------
// shortest edit script
// ---------------------------------------------------------------------------

/// Index pairs of a longest common subsequence, from a shortest edit script.
pub fn lcs_pairs<T: PartialEq>(a: &[T], b: &[T]) -> Vec<(usize, usize)> {
    let mut pre = 0;
    while pre < a.len() && pre < b.len() && a[pre] == b[pre] {
        pre += 1;
    }
    let mut suf = 0;
    while suf < a.len() - pre && suf < b.len() - pre && a[a.len() - 1 - suf] == b[b.len() - 1 - suf] {
        suf += 1;
    }
    let mut out: Vec<(usize, usize)> = (0..pre).map(|i| (i, i)).collect();
    let mid = myers(&a[pre..a.len() - suf], &b[pre..b.len() - suf]);
    out.extend(mid.into_iter().map(|(i, j)| (i + pre, j + pre)));
    out.extend((0..suf).map(|s| (a.len() - suf + s, b.len() - suf + s)));
    out
}

/// Length of the longest common subsequence.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    lcs_pairs(a, b).len()
}

// Greedy forward search storing the frontier of every round, then backtrack.
fn myers<T: PartialEq>(a: &[T], b: &[T]) -> Vec<(usize, usize)> {
    let n = a.len() as isize;
    let m = b.len() as isize;
    if n == 0 || m == 0 {
        return Vec::new();
    }
    let max = n + m;
    let offset = max + 1;
    let mut v = vec![0isize; (2 * max + 3) as usize];
    // trace[d] holds v[k] for k in -d-1..=d+1 before round d
    let mut trace: Vec<Vec<isize>> = Vec::new();
    'search: for d in 0..=max {
        trace.push(v[(offset - d - 1) as usize..=(offset + d + 1) as usize].to_vec());
        let mut k = -d;
        while k <= d {
            let i = (offset + k) as usize;
            let mut x = if k == -d || (k != d && v[i - 1] < v[i + 1]) { v[i + 1] } else { v[i - 1] + 1 };
            let mut y = x - k;
            while x < n && y < m && a[x as usize] == b[y as usize] {
                x += 1;
                y += 1;
            }
            v[i] = x;
            if x >= n && y >= m {
                break 'search;
            }
            k += 2;
        }
    }
    let mut pairs = Vec::new();
    let (mut x, mut y) = (n, m);
    for d in (0..trace.len() as isize).rev() {
        let snap = &trace[d as usize];
        let at = |k: isize| snap[(k + d + 1) as usize];
        let k = x - y;
        let prev_k = if k == -d || (k != d && at(k - 1) < at(k + 1)) { k + 1 } else { k - 1 };
        let prev_x = at(prev_k);
        let prev_y = prev_x - prev_k;
        while x > prev_x && y > prev_y && x > 0 && y > 0 {
            x -= 1;
            y -= 1;
            pairs.push((x as usize, y as usize));
        }
        if d > 0 {
            x = prev_x;
            y = prev_y;
        }
    }
    pairs.reverse();
    pairs
}

/// Normalized token-LCS similarity `2·LCS / (|a| + |b|)`; 1.0 for two empty inputs.
pub fn lcs_ratio<T: PartialEq>(a: &[T], b: &[T]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    2.0 * lcs_len(a, b) as f64 / (a.len() + b.len()) as f64
}

// ---------------------------------------------------------------------------
// token-level script
// ---------------------------------------------------------------------------

/// One hunk of a token-level edit script.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptEdit {
    pub op: EditOp,
    /// Changed token indices on each side.
    pub src_tokens: Range<usize>,
    pub tgt_tokens: Range<usize>,
    /// Character ranges; these include whitespace changes.
    pub src_range: Range<usize>,
    pub tgt_range: Range<usize>,
}

struct Region {
    src_tok: Range<usize>,
    tgt_tok: Range<usize>,
    src_bytes: Range<usize>,
    tgt_bytes: Range<usize>,
}

/// Gaps between consecutive anchors whose text differs.
fn regions(
    src: &str,
    tgt: &str,
    st: &[Token<'_>],
    tt: &[Token<'_>],
    anchors: &[(usize, usize)],
) -> Vec<Region> {
    let mut out = Vec::new();
    let mut prev: Option<(usize, usize)> = None;
    let bounds = anchors.iter().copied().map(Some).chain(std::iter::once(None));
    for next in bounds {
        let src_tok = prev.map_or(0, |p| p.0 + 1)..next.map_or(st.len(), |n| n.0);
        let tgt_tok = prev.map_or(0, |p| p.1 + 1)..next.map_or(tt.len(), |n| n.1);
        let src_bytes = prev.map_or(0, |p| st[p.0].end)..next.map_or(src.len(), |n| st[n.0].start);
        let tgt_bytes = prev.map_or(0, |p| tt[p.1].end)..next.map_or(tgt.len(), |n| tt[n.1].start);
        if src[src_bytes.clone()] != tgt[tgt_bytes.clone()] {
            out.push(Region {
                src_tok,
                tgt_tok,
                src_bytes,
                tgt_bytes,
            });
        }
        prev = next;
    }
    out
}

/// Shrinks a piece by whitespace common to both sides at either end.
fn trim_common_whitespace(src: &str, tgt: &str, s: &mut Range<usize>, t: &mut Range<usize>) {
    loop {
        let (a, b) = (src[s.clone()].chars().next(), tgt[t.clone()].chars().next());
        match (a, b) {
            (Some(x), Some(y)) if x == y && x.is_whitespace() => {
                s.start += x.len_utf8();
                t.start += x.len_utf8();
            }
            _ => break,
        }
    }
    loop {
        let (a, b) = (src[s.clone()].chars().next_back(), tgt[t.clone()].chars().next_back());
        match (a, b) {
            (Some(x), Some(y)) if x == y && x.is_whitespace() => {
                s.end -= x.len_utf8();
                t.end -= x.len_utf8();
            }
            _ => break,
        }
    }
}

/// Minimal token-level edit script. Adjacent deletions and insertions between
/// the same anchors are fused into one `Modify`.
pub fn diff_tokens(src: &str, tgt: &str) -> Vec<ScriptEdit> {
    let st = tokenize(src);
    let tt = tokenize(tgt);
    let a: Vec<&str> = st.iter().map(|t| t.text).collect();
    let b: Vec<&str> = tt.iter().map(|t| t.text).collect();
    let anchors = lcs_pairs(&a, &b);
    let (sm, tm) = (CharMap::new(src), CharMap::new(tgt));
    let mut out = Vec::new();
    for r in regions(src, tgt, &st, &tt, &anchors) {
        let (mut s, mut t) = (r.src_bytes.clone(), r.tgt_bytes.clone());
        trim_common_whitespace(src, tgt, &mut s, &mut t);
        let Some(op) = EditOp::from_spans(&src[s.clone()], &tgt[t.clone()]) else {
            continue;
        };
        out.push(ScriptEdit {
            op,
            src_tokens: r.src_tok,
            tgt_tokens: r.tgt_tok,
            src_range: sm.char_range(s),
            tgt_range: tm.char_range(t),
        });
    }
    out
}

// ---------------------------------------------------------------------------
// sentence alignment
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlignKind {
    Matched,
    Inserted,
    Deleted,
    Modified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlignmentPair {
    pub src_index: Option<usize>,
    pub tgt_index: Option<usize>,
    pub kind: AlignKind,
}

/// Monotone alignment maximizing summed similarity. Pairs whose similarity
/// falls below `threshold` are never aligned; equality counts as aligned.
pub fn monotone_align<F, G>(n: usize, m: usize, sim: F, identical: G, threshold: f64) -> Vec<AlignmentPair>
where
    F: Fn(usize, usize) -> f64,
    G: Fn(usize, usize) -> bool,
{
    #[derive(Clone, Copy)]
    enum Step {
        Diag,
        Up,
        Left,
    }
    let w = m + 1;
    let mut score = vec![0.0f64; (n + 1) * w];
    let mut step = vec![Step::Up; (n + 1) * w];
    for j in 1..=m {
        step[j] = Step::Left;
    }
    for i in 1..=n {
        for j in 1..=m {
            let up = score[(i - 1) * w + j];
            let left = score[i * w + j - 1];
            let (mut best, mut choice) = if up >= left { (up, Step::Up) } else { (left, Step::Left) };
            let s = sim(i - 1, j - 1);
            if s >= threshold {
                let diag = score[(i - 1) * w + j - 1] + s;
                if diag >= best {
                    best = diag;
                    choice = Step::Diag;
                }
            }
            score[i * w + j] = best;
            step[i * w + j] = choice;
        }
    }
    let mut out = Vec::new();
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        match if i == 0 { Step::Left } else { step[i * w + j] } {
            Step::Diag => {
                let kind = if identical(i - 1, j - 1) { AlignKind::Matched } else { AlignKind::Modified };
                out.push(AlignmentPair {
                    src_index: Some(i - 1),
                    tgt_index: Some(j - 1),
                    kind,
                });
                i -= 1;
                j -= 1;
            }
            Step::Up if j == 0 || i > 0 => {
                out.push(AlignmentPair {
                    src_index: Some(i - 1),
                    tgt_index: None,
                    kind: AlignKind::Deleted,
                });
                i -= 1;
            }
            _ => {
                out.push(AlignmentPair {
                    src_index: None,
                    tgt_index: Some(j - 1),
                    kind: AlignKind::Inserted,
                });
                j -= 1;
            }
        }
    }
    out.reverse();
    out
}

/// Aligns two sentence lists by token-LCS ratio.
pub fn align_sentences(src: &[SentenceSpan], tgt: &[SentenceSpan]) -> Vec<AlignmentPair> {
    align_sentences_with(src, tgt, DEFAULT_ALIGN_THRESHOLD)
}

pub fn align_sentences_with(src: &[SentenceSpan], tgt: &[SentenceSpan], threshold: f64) -> Vec<AlignmentPair> {
    let st: Vec<Vec<&str>> = src.iter().map(|s| token_texts(&s.text)).collect();
    let tt: Vec<Vec<&str>> = tgt.iter().map(|s| token_texts(&s.text)).collect();
    monotone_align(
        src.len(),
        tgt.len(),
        |i, j| lcs_ratio(&st[i], &tt[j]),
        |i, j| src[i].text == tgt[j].text,
        threshold,
    )
}

fn token_texts(s: &str) -> Vec<&str> {
    tokenize(s).into_iter().map(|t| t.text).collect()
}

// ---------------------------------------------------------------------------
// revision extraction
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Unit {
    Pair { src: usize, tgt: usize },
    SentenceDeleted(usize),
    SentenceInserted(usize),
    ParagraphDeleted(usize),
    ParagraphInserted(usize),
}

/// Alignment of two documents at paragraph and sentence level.
#[derive(Debug, Clone)]
pub struct DocumentAlignment {
    pub src_sentences: Vec<SentenceSpan>,
    pub tgt_sentences: Vec<SentenceSpan>,
    /// Paragraph alignment (indices into paragraphs).
    pub paragraphs: Vec<AlignmentPair>,
    /// Sentence alignment inside aligned paragraphs, in document order.
    pub sentences: Vec<AlignmentPair>,
    units: Vec<Unit>,
}

#[derive(Debug, Clone, Copy)]
pub struct AlignConfig {
    pub sentence_threshold: f64,
    pub paragraph_threshold: f64,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig {
            sentence_threshold: DEFAULT_ALIGN_THRESHOLD,
            paragraph_threshold: DEFAULT_ALIGN_THRESHOLD,
        }
    }
}

pub fn align_documents(src: &str, tgt: &str, cfg: &AlignConfig) -> DocumentAlignment {
    let ss = segment_sentences(src);
    let ts = segment_sentences(tgt);
    let sp = paragraph_ranges(src);
    let tp = paragraph_ranges(tgt);
    let s_tok: Vec<Vec<&str>> = sp.iter().map(|r| token_texts(&src[r.clone()])).collect();
    let t_tok: Vec<Vec<&str>> = tp.iter().map(|r| token_texts(&tgt[r.clone()])).collect();
    let paragraphs = monotone_align(
        sp.len(),
        tp.len(),
        |i, j| {
            if src[sp[i].clone()] == tgt[tp[j].clone()] {
                1.0
            } else {
                lcs_ratio(&s_tok[i], &t_tok[j])
            }
        },
        |i, j| src[sp[i].clone()] == tgt[tp[j].clone()],
        cfg.paragraph_threshold,
    );
    let sentences_of = |spans: &[SentenceSpan], p: usize| -> Range<usize> {
        let start = spans.iter().position(|s| s.paragraph_index == p).unwrap_or(spans.len());
        let end = spans[start..].iter().take_while(|s| s.paragraph_index == p).count() + start;
        start..end
    };
    let mut units = Vec::new();
    let mut sentences = Vec::new();
    for pa in &paragraphs {
        match (pa.src_index, pa.tgt_index) {
            (Some(p), Some(q)) => {
                let sr = sentences_of(&ss, p);
                let tr = sentences_of(&ts, q);
                for a in align_sentences_with(&ss[sr.clone()], &ts[tr.clone()], cfg.sentence_threshold) {
                    let a = AlignmentPair {
                        src_index: a.src_index.map(|i| i + sr.start),
                        tgt_index: a.tgt_index.map(|j| j + tr.start),
                        kind: a.kind,
                    };
                    units.push(match (a.src_index, a.tgt_index) {
                        (Some(s), Some(t)) => Unit::Pair { src: s, tgt: t },
                        (Some(s), None) => Unit::SentenceDeleted(s),
                        (None, Some(t)) => Unit::SentenceInserted(t),
                        (None, None) => unreachable!(),
                    });
                    sentences.push(a);
                }
            }
            (Some(p), None) => units.push(Unit::ParagraphDeleted(p)),
            (None, Some(q)) => units.push(Unit::ParagraphInserted(q)),
            (None, None) => unreachable!(),
        }
    }
    DocumentAlignment {
        src_sentences: ss,
        tgt_sentences: ts,
        paragraphs,
        sentences,
        units,
    }
}

/// Index of the span containing byte `pos`.
fn span_at(spans: &[SentenceSpan], pos: usize) -> usize {
    spans.partition_point(|s| s.byte_range.end <= pos).min(spans.len().saturating_sub(1))
}

/// Extracts the edit actions turning `src` into `tgt`.
pub fn extract_revision(doc_id: &str, depth: u32, src: &str, tgt: &str) -> Result<Revision, DiffError> {
    extract_revision_with(&AlignConfig::default(), doc_id, depth, src, tgt)
}

pub fn extract_revision_with(
    cfg: &AlignConfig,
    doc_id: &str,
    depth: u32,
    src: &str,
    tgt: &str,
) -> Result<Revision, DiffError> {
    if src == tgt {
        return Err(DiffError::IdenticalTexts);
    }
    let actions = extract_actions(cfg, src, tgt);
    debug_assert!(!actions.is_empty());
    Ok(Revision {
        doc_id: doc_id.to_string(),
        depth,
        source_text: src.to_string(),
        target_text: tgt.to_string(),
        actions: actions.into_iter().map(LabeledAction::unlabeled).collect(),
        domain: Domain::Other,
    })
}

pub fn extract_actions(cfg: &AlignConfig, src: &str, tgt: &str) -> Vec<EditAction> {
    let al = align_documents(src, tgt, cfg);
    let st = tokenize(src);
    let tt = tokenize(tgt);

    // unit id of every token
    let mut src_unit = vec![usize::MAX; st.len()];
    let mut tgt_unit = vec![usize::MAX; tt.len()];
    let src_sent: Vec<usize> = st.iter().map(|t| span_at(&al.src_sentences, t.start)).collect();
    let tgt_sent: Vec<usize> = tt.iter().map(|t| span_at(&al.tgt_sentences, t.start)).collect();
    let mut sent_unit_src = vec![usize::MAX; al.src_sentences.len()];
    let mut sent_unit_tgt = vec![usize::MAX; al.tgt_sentences.len()];
    for (u, unit) in al.units.iter().enumerate() {
        match *unit {
            Unit::Pair { src, tgt } => {
                sent_unit_src[src] = u;
                sent_unit_tgt[tgt] = u;
            }
            Unit::SentenceDeleted(s) => sent_unit_src[s] = u,
            Unit::SentenceInserted(t) => sent_unit_tgt[t] = u,
            Unit::ParagraphDeleted(p) => {
                for (i, s) in al.src_sentences.iter().enumerate() {
                    if s.paragraph_index == p {
                        sent_unit_src[i] = u;
                    }
                }
            }
            Unit::ParagraphInserted(q) => {
                for (i, s) in al.tgt_sentences.iter().enumerate() {
                    if s.paragraph_index == q {
                        sent_unit_tgt[i] = u;
                    }
                }
            }
        }
    }
    for (i, s) in src_sent.iter().enumerate() {
        src_unit[i] = sent_unit_src[*s];
    }
    for (j, t) in tgt_sent.iter().enumerate() {
        tgt_unit[j] = sent_unit_tgt[*t];
    }

    // token anchors inside aligned sentence pairs
    let mut anchors = Vec::new();
    for unit in &al.units {
        if let Unit::Pair { src: s, tgt: t } = *unit {
            let si: Vec<usize> = (0..st.len()).filter(|&i| src_sent[i] == s).collect();
            let ti: Vec<usize> = (0..tt.len()).filter(|&j| tgt_sent[j] == t).collect();
            let a: Vec<&str> = si.iter().map(|&i| st[i].text).collect();
            let b: Vec<&str> = ti.iter().map(|&j| tt[j].text).collect();
            anchors.extend(lcs_pairs(&a, &b).into_iter().map(|(x, y)| (si[x], ti[y])));
        }
    }

    let (sm, tm) = (CharMap::new(src), CharMap::new(tgt));
    let mut out = Vec::new();
    for r in regions(src, tgt, &st, &tt, &anchors) {
        let mut ids: Vec<usize> = r
            .src_tok
            .clone()
            .map(|i| src_unit[i])
            .chain(r.tgt_tok.clone().map(|j| tgt_unit[j]))
            .collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.is_empty() {
            // whitespace-only change between anchors
            let (mut s, mut t) = (r.src_bytes.clone(), r.tgt_bytes.clone());
            trim_common_whitespace(src, tgt, &mut s, &mut t);
            let sent = al.src_sentences.get(span_at(&al.src_sentences, s.start));
            push_action(&mut out, src, tgt, &sm, &tm, s, t, Granularity::SentenceLevel, sent.map(|_| span_at(&al.src_sentences, r.src_bytes.start)), sent.map(|x| x.paragraph_index));
            continue;
        }
        let mut src_cut = r.src_bytes.start;
        let mut tgt_cut = r.tgt_bytes.start;
        for (n, &u) in ids.iter().enumerate() {
            let last = n + 1 == ids.len();
            let s_core = core(&st, r.src_tok.clone(), &src_unit, u);
            let t_core = core(&tt, r.tgt_tok.clone(), &tgt_unit, u);
            let s_end = if last { r.src_bytes.end } else { s_core.as_ref().map_or(src_cut, |c| c.end) };
            let t_end = if last { r.tgt_bytes.end } else { t_core.as_ref().map_or(tgt_cut, |c| c.end) };
            let (mut s, mut t) = (src_cut..s_end, tgt_cut..t_end);
            src_cut = s_end;
            tgt_cut = t_end;
            trim_common_whitespace(src, tgt, &mut s, &mut t);
            let (gran, sidx, pidx) = match al.units[u] {
                Unit::Pair { src: si, .. } => (
                    Granularity::SentenceLevel,
                    Some(si),
                    Some(al.src_sentences[si].paragraph_index),
                ),
                Unit::SentenceDeleted(si) => (
                    Granularity::ParagraphLevel,
                    Some(si),
                    Some(al.src_sentences[si].paragraph_index),
                ),
                Unit::SentenceInserted(ti) => (
                    Granularity::ParagraphLevel,
                    Some(ti),
                    Some(al.tgt_sentences[ti].paragraph_index),
                ),
                Unit::ParagraphDeleted(p) | Unit::ParagraphInserted(p) => (Granularity::DocumentLevel, None, Some(p)),
            };
            push_action(&mut out, src, tgt, &sm, &tm, s, t, gran, sidx, pidx);
        }
    }
    out
}

fn core(tokens: &[Token<'_>], range: Range<usize>, unit_of: &[usize], u: usize) -> Option<Range<usize>> {
    let mut it = range.filter(|&i| unit_of[i] == u);
    let first = it.next()?;
    let last = it.last().unwrap_or(first);
    Some(tokens[first].start..tokens[last].end)
}

#[allow(clippy::too_many_arguments)]
fn push_action(
    out: &mut Vec<EditAction>,
    src: &str,
    tgt: &str,
    sm: &CharMap,
    tm: &CharMap,
    s: Range<usize>,
    t: Range<usize>,
    granularity: Granularity,
    sentence_index: Option<usize>,
    paragraph_index: Option<usize>,
) {
    let original = &src[s.clone()];
    let revised = &tgt[t.clone()];
    let Some(op) = EditOp::from_spans(original, revised) else {
        return;
    };
    out.push(EditAction {
        op,
        granularity,
        original: original.to_string(),
        revised: revised.to_string(),
        src_range: sm.char_range(s),
        tgt_range: tm.char_range(t),
        sentence_index,
        paragraph_index,
    });
}

/// Applies actions (ordered by source position) to `src`, checking every
/// offset against the text it claims to replace.
pub fn apply_edits(src: &str, actions: &[EditAction]) -> Result<String, DiffError> {
    let map = CharMap::new(src);
    let bad = |index: usize, reason: String| DiffError::InconsistentOffsets { index, reason };
    let mut out = String::with_capacity(src.len());
    let mut out_chars = 0usize;
    let mut cursor = 0usize; // char offset into src
    for (index, a) in actions.iter().enumerate() {
        let r = &a.src_range;
        if r.start < cursor || r.start > r.end {
            return Err(bad(index, format!("source range {r:?} overlaps or precedes offset {cursor}")));
        }
        let (Some(bs), Some(be)) = (map.to_byte(r.start), map.to_byte(r.end)) else {
            return Err(bad(index, format!("source range {r:?} beyond text of {} chars", map.char_len())));
        };
        if src[bs..be] != a.original {
            return Err(bad(index, format!("source text {:?} != original {:?}", &src[bs..be], a.original)));
        }
        if EditOp::from_spans(&a.original, &a.revised) != Some(a.op) {
            return Err(bad(index, format!("op {:?} inconsistent with spans", a.op)));
        }
        let keep = &src[map.to_byte(cursor).unwrap_or(src.len())..bs];
        out.push_str(keep);
        out_chars += r.start - cursor;
        let rev_len = a.revised.chars().count();
        if a.tgt_range.start != out_chars || a.tgt_range.len() != rev_len {
            return Err(bad(
                index,
                format!("target range {:?} expected {}..{}", a.tgt_range, out_chars, out_chars + rev_len),
            ));
        }
        out.push_str(&a.revised);
        out_chars += rev_len;
        cursor = r.end;
    }
    out.push_str(&src[map.to_byte(cursor).unwrap_or(src.len())..]);
    Ok(out)
}

/// Sub-revisions at paragraph or sentence unit, one per changed aligned unit.
/// Offsets of every action are relative to the unit texts.
pub fn split_into_units(rev: &Revision, unit: UnitLevel, cfg: &AlignConfig) -> Vec<Revision> {
    let src = rev.source_text.as_str();
    let tgt = rev.target_text.as_str();
    let al = align_documents(src, tgt, cfg);
    let mut pairs: Vec<(String, String, Granularity)> = Vec::new();
    match unit {
        UnitLevel::Paragraph => {
            let sp = paragraph_ranges(src);
            let tp = paragraph_ranges(tgt);
            for p in &al.paragraphs {
                let a = p.src_index.map_or("", |i| &src[sp[i].clone()]);
                let b = p.tgt_index.map_or("", |j| &tgt[tp[j].clone()]);
                pairs.push((a.to_string(), b.to_string(), Granularity::DocumentLevel));
            }
        }
        UnitLevel::Sentence => {
            for p in &al.sentences {
                let a = p.src_index.map_or("", |i| al.src_sentences[i].text.as_str());
                let b = p.tgt_index.map_or("", |j| al.tgt_sentences[j].text.as_str());
                pairs.push((a.to_string(), b.to_string(), Granularity::ParagraphLevel));
            }
        }
    }
    pairs
        .into_iter()
        .filter(|(a, b, _)| a != b)
        .map(|(a, b, whole)| {
            let actions = if a.is_empty() || b.is_empty() {
                let (sm, tm) = (CharMap::new(&a), CharMap::new(&b));
                let mut v = Vec::new();
                push_action(&mut v, &a, &b, &sm, &tm, 0..a.len(), 0..b.len(), whole, None, None);
                v
            } else {
                extract_actions(cfg, &a, &b)
            };
            Revision {
                doc_id: rev.doc_id.clone(),
                depth: rev.depth,
                source_text: a,
                target_text: b,
                actions: actions.into_iter().map(LabeledAction::unlabeled).collect(),
                domain: rev.domain,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitLevel {
    Paragraph,
    Sentence,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcs_dp(a: &[&str], b: &[&str]) -> usize {
        let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                t[i][j] = if a[i - 1] == b[j - 1] {
                    t[i - 1][j - 1] + 1
                } else {
                    t[i - 1][j].max(t[i][j - 1])
                };
            }
        }
        t[a.len()][b.len()]
    }

    #[test]
    fn myers_matches_dp_on_small_cases() {
        let cases = [
            ("a b c", "a x b c y"),
            ("a b c d", "a c d b"),
            ("", "x y"),
            ("x y", ""),
            ("a a a b", "b a a"),
            ("the cat sat on the mat", "the dog sat on a mat today"),
        ];
        for (x, y) in cases {
            let a: Vec<&str> = x.split_whitespace().collect();
            let b: Vec<&str> = y.split_whitespace().collect();
            let pairs = lcs_pairs(&a, &b);
            assert_eq!(pairs.len(), lcs_dp(&a, &b), "{x:?} vs {y:?}");
            for w in pairs.windows(2) {
                assert!(w[0].0 < w[1].0 && w[0].1 < w[1].1);
            }
            for (i, j) in pairs {
                assert_eq!(a[i], b[j]);
            }
        }
    }

    #[test]
    fn identical_texts_give_empty_script() {
        assert!(diff_tokens("same text here.", "same text here.").is_empty());
    }

    #[test]
    fn typo_fix_is_one_modify() {
        let script = diff_tokens("She went to the markt.", "She went to the market.");
        assert_eq!(script.len(), 1);
        assert_eq!(script[0].op, EditOp::Modify);
        assert_eq!(script[0].src_range, 16..21);
        assert_eq!(script[0].tgt_range, 16..22);
    }

    #[test]
    fn two_insertions() {
        let src = "a b c";
        let tgt = "a x b c y";
        let script = diff_tokens(src, tgt);
        assert_eq!(script.len(), 2);
        assert!(script.iter().all(|e| e.op == EditOp::Insert));
        let inserted: Vec<String> = script
            .iter()
            .map(|e| tgt.chars().skip(e.tgt_range.start).take(e.tgt_range.len()).collect::<String>().trim().to_string())
            .collect();
        assert_eq!(inserted, vec!["x", "y"]);
        assert_eq!(script[0].tgt_tokens, 1..2);
        assert_eq!(script[1].tgt_tokens, 4..5);
    }

    #[test]
    fn identical_documents_align_by_identity() {
        let s = segment_sentences("One here. Two here. Three here.");
        let al = align_sentences(&s, &s);
        assert_eq!(al.len(), 3);
        for (i, p) in al.iter().enumerate() {
            assert_eq!((p.src_index, p.tgt_index, p.kind), (Some(i), Some(i), AlignKind::Matched));
        }
    }

    #[test]
    fn appended_sentence_aligns_as_insert() {
        let s = segment_sentences("One here. Two here.");
        let t = segment_sentences("One here. Two here. Three is new.");
        let al = align_sentences(&s, &t);
        let kinds: Vec<AlignKind> = al.iter().map(|p| p.kind).collect();
        assert_eq!(kinds, vec![AlignKind::Matched, AlignKind::Matched, AlignKind::Inserted]);
    }

    #[test]
    fn split_sentence_is_modified_plus_inserted() {
        let s = segment_sentences("The model works well and it is fast.");
        let t = segment_sentences("The model works well. It is fast.");
        let kinds: Vec<AlignKind> = align_sentences(&s, &t).iter().map(|p| p.kind).collect();
        assert_eq!(kinds, vec![AlignKind::Modified, AlignKind::Inserted]);
    }

    #[test]
    fn identical_texts_rejected() {
        assert_eq!(extract_revision("d", 1, "x", "x"), Err(DiffError::IdenticalTexts));
    }

    #[test]
    fn single_typo_is_sentence_level_modify() {
        let rev = extract_revision("d", 1, "She went to the markt. It was closed.", "She went to the market. It was closed.").unwrap();
        assert_eq!(rev.actions.len(), 1);
        let a = &rev.actions[0].action;
        assert_eq!((a.op, a.granularity), (EditOp::Modify, Granularity::SentenceLevel));
        assert_eq!((a.original.as_str(), a.revised.as_str()), ("markt", "market"));
        assert_eq!(a.sentence_index, Some(0));
    }

    #[test]
    fn appended_sentence_is_paragraph_level_insert() {
        let src = "The system was designed for English.";
        let tgt = "The system was designed for English. Nevertheless, it was currently applied for Brazilian Portuguese.";
        let rev = extract_revision("d", 1, src, tgt).unwrap();
        assert_eq!(rev.actions.len(), 1);
        let a = &rev.actions[0].action;
        assert_eq!((a.op, a.granularity), (EditOp::Insert, Granularity::ParagraphLevel));
        assert_eq!(a.revised.trim(), "Nevertheless, it was currently applied for Brazilian Portuguese.");
        assert_eq!(apply_edits(src, &[a.clone()]).unwrap(), tgt);
    }

    #[test]
    fn new_paragraph_is_document_level() {
        let src = "First paragraph stays.";
        let tgt = "First paragraph stays.\n\nA brand new paragraph appears here.";
        let rev = extract_revision("d", 1, src, tgt).unwrap();
        assert_eq!(rev.actions.len(), 1);
        assert_eq!(rev.actions[0].action.granularity, Granularity::DocumentLevel);
    }

    #[test]
    fn whitespace_and_case_are_edits() {
        let rev = extract_revision("d", 1, "The  cat. The dog.", "The cat. the dog.").unwrap();
        assert_eq!(rev.actions.len(), 2);
        let acts: Vec<EditAction> = rev.actions.iter().map(|a| a.action.clone()).collect();
        assert_eq!(apply_edits(&rev.source_text, &acts).unwrap(), rev.target_text);
    }

    #[test]
    fn apply_rejects_stale_offsets() {
        let rev = extract_revision("d", 1, "She went to the markt.", "She went to the market.").unwrap();
        let mut a = rev.actions[0].action.clone();
        assert_eq!(apply_edits("", &[]).unwrap(), "");
        assert_eq!(apply_edits("abc", &[]).unwrap(), "abc");
        a.src_range = 15..20;
        assert!(matches!(
            apply_edits(&rev.source_text, &[a]),
            Err(DiffError::InconsistentOffsets { index: 0, .. })
        ));
    }

    #[test]
    fn unicode_offsets_are_characters() {
        let src = "Café au lait.";
        let tgt = "Café au laît noir.";
        let rev = extract_revision("d", 1, src, tgt).unwrap();
        let acts: Vec<EditAction> = rev.actions.iter().map(|a| a.action.clone()).collect();
        assert_eq!(acts[0].src_range, 8..12);
        assert_eq!(apply_edits(src, &acts).unwrap(), tgt);
    }

    #[test]
    fn sentence_units() {
        let src = "Alpha beta gamma. Delta epsilon.";
        let tgt = "Alpha beta gama. Delta epsilon. Zeta eta.";
        let rev = extract_revision("d", 1, src, tgt).unwrap();
        let units = split_into_units(&rev, UnitLevel::Sentence, &AlignConfig::default());
        assert_eq!(units.len(), 2);
        assert_eq!(units[0].source_text, "Alpha beta gamma.");
        assert_eq!(units[1].source_text, "");
        assert_eq!(units[1].actions[0].action.granularity, Granularity::ParagraphLevel);
    }
}
