//! Documents, revisions, edit actions and intentions, plus corpus statistics
//! and the JSONL wire format shared by every other module.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::ops::Range;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

/// Size class of the text object an edit touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    /// Token or phrase objects inside one sentence.
    #[serde(rename = "sentence", alias = "sentence-level", alias = "token", alias = "phrase")]
    SentenceLevel,
    /// Whole sentences inside a paragraph.
    #[serde(rename = "paragraph", alias = "paragraph-level")]
    ParagraphLevel,
    /// Whole paragraphs inside a document.
    #[serde(rename = "document", alias = "document-level")]
    DocumentLevel,
}

impl Granularity {
    pub const ALL: [Granularity; 3] = [
        Granularity::SentenceLevel,
        Granularity::ParagraphLevel,
        Granularity::DocumentLevel,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Granularity::SentenceLevel => "sentence",
            Granularity::ParagraphLevel => "paragraph",
            Granularity::DocumentLevel => "document",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EditOp {
    #[serde(rename = "insert", alias = "A", alias = "add", alias = "Insert")]
    Insert,
    #[serde(rename = "delete", alias = "D", alias = "remove", alias = "Delete")]
    Delete,
    #[serde(rename = "modify", alias = "R", alias = "replace", alias = "Modify")]
    Modify,
}

impl EditOp {
    pub fn as_str(self) -> &'static str {
        match self {
            EditOp::Insert => "insert",
            EditOp::Delete => "delete",
            EditOp::Modify => "modify",
        }
    }

    /// The op implied by which sides of an edit carry text.
    pub fn from_spans(original: &str, revised: &str) -> Option<EditOp> {
        match (original.is_empty(), revised.is_empty()) {
            (true, true) => None,
            (true, false) => Some(EditOp::Insert),
            (false, true) => Some(EditOp::Delete),
            (false, false) => Some(EditOp::Modify),
        }
    }
}

/// One local change. Ranges are half-open character (not byte) offsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditAction {
    pub op: EditOp,
    pub granularity: Granularity,
    pub original: String,
    pub revised: String,
    pub src_range: Range<usize>,
    pub tgt_range: Range<usize>,
    pub sentence_index: Option<usize>,
    pub paragraph_index: Option<usize>,
}

/// Edit-intention taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EditIntention {
    Fluency,
    Coherence,
    Clarity,
    Style,
    MeaningChanged,
    Other,
}

impl EditIntention {
    pub const ALL: [EditIntention; 6] = [
        EditIntention::Fluency,
        EditIntention::Coherence,
        EditIntention::Clarity,
        EditIntention::Style,
        EditIntention::MeaningChanged,
        EditIntention::Other,
    ];

    /// Labels a classifier is trained on; `Other` is excluded.
    pub const TRAINABLE: [EditIntention; 5] = [
        EditIntention::Fluency,
        EditIntention::Coherence,
        EditIntention::Clarity,
        EditIntention::Style,
        EditIntention::MeaningChanged,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EditIntention::Fluency => "fluency",
            EditIntention::Coherence => "coherence",
            EditIntention::Clarity => "clarity",
            EditIntention::Style => "style",
            EditIntention::MeaningChanged => "meaning-changed",
            EditIntention::Other => "other",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            EditIntention::Fluency => "Fluency",
            EditIntention::Coherence => "Coherence",
            EditIntention::Clarity => "Clarity",
            EditIntention::Style => "Style",
            EditIntention::MeaningChanged => "Meaning-changed",
            EditIntention::Other => "Other",
        }
    }

    /// Fluency, Coherence, Clarity and Style preserve meaning.
    pub fn is_meaning_preserving(self) -> bool {
        matches!(
            self,
            EditIntention::Fluency
                | EditIntention::Coherence
                | EditIntention::Clarity
                | EditIntention::Style
        )
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for EditIntention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown edit intention {0:?}")]
pub struct UnknownIntention(pub String);

impl FromStr for EditIntention {
    type Err = UnknownIntention;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .trim()
            .to_lowercase()
            .chars()
            .filter(|c| c.is_alphanumeric())
            .collect();
        Ok(match key.as_str() {
            "fluency" => EditIntention::Fluency,
            "coherence" => EditIntention::Coherence,
            "clarity" => EditIntention::Clarity,
            "style" => EditIntention::Style,
            "meaningchanged" | "meaning" => EditIntention::MeaningChanged,
            "other" => EditIntention::Other,
            _ => return Err(UnknownIntention(s.to_string())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Domain {
    ArXiv,
    Wikipedia,
    Wikinews,
    Other,
}

impl Domain {
    pub const ALL: [Domain; 4] = [Domain::ArXiv, Domain::Wikipedia, Domain::Wikinews, Domain::Other];

    pub fn as_str(self) -> &'static str {
        match self {
            Domain::ArXiv => "arxiv",
            Domain::Wikipedia => "wikipedia",
            Domain::Wikinews => "wikinews",
            Domain::Other => "other",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Domain::ArXiv => "ArXiv",
            Domain::Wikipedia => "Wikipedia",
            Domain::Wikinews => "Wikinews",
            Domain::Other => "Other",
        }
    }

    /// Never fails: unknown names map to `Other`.
    pub fn parse(s: &str) -> Domain {
        match s.trim().to_lowercase().as_str() {
            "arxiv" => Domain::ArXiv,
            "wikipedia" | "wiki" => Domain::Wikipedia,
            "wikinews" | "news" => Domain::Wikinews,
            _ => Domain::Other,
        }
    }
}

/// An edit action with its (optional) intention and annotation data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledAction {
    pub action: EditAction,
    pub intention: Option<EditIntention>,
    /// Classifier confidence; `None` for human labels.
    pub confidence: Option<f64>,
    pub raw_labels: Vec<EditIntention>,
    /// Annotation round per raw label (1 = crowd, 2 = expert); empty if unknown.
    pub label_rounds: Vec<u8>,
}

impl LabeledAction {
    pub fn unlabeled(action: EditAction) -> Self {
        LabeledAction {
            action,
            intention: None,
            confidence: None,
            raw_labels: Vec::new(),
            label_rounds: Vec::new(),
        }
    }

    pub fn labeled(action: EditAction, intention: EditIntention) -> Self {
        LabeledAction {
            intention: Some(intention),
            ..LabeledAction::unlabeled(action)
        }
    }
}

/// A pair of consecutive document versions and the edits between them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Revision {
    pub doc_id: String,
    pub depth: u32,
    pub source_text: String,
    pub target_text: String,
    pub actions: Vec<LabeledAction>,
    pub domain: Domain,
}

/// One saved version of a document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Version {
    pub timestamp: DateTime<Utc>,
    pub text: String,
}

/// The timestamp-ordered versions of one document and the revisions between them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevisionChain {
    pub doc_id: String,
    pub versions: Vec<Version>,
    pub revisions: Vec<Revision>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChainViolation {
    /// `versions[index]` is older than `versions[index - 1]`.
    OrderingViolation { index: usize },
    MissingRevision { depth: u32 },
    UnexpectedRevision { index: usize, depth: u32 },
    DepthMismatch { index: usize, expected: u32, found: u32 },
    /// Revision texts do not match the versions it should pair.
    PairMismatch { depth: u32 },
    DocIdMismatch { index: usize },
}

impl fmt::Display for ChainViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainViolation::OrderingViolation { index } => {
                write!(f, "versions out of timestamp order at index {index}")
            }
            ChainViolation::MissingRevision { depth } => write!(f, "missing revision at depth {depth}"),
            ChainViolation::UnexpectedRevision { index, depth } => {
                write!(f, "unexpected revision at index {index} (depth {depth})")
            }
            ChainViolation::DepthMismatch { index, expected, found } => write!(
                f,
                "revision at index {index} has depth {found}, expected {expected}"
            ),
            ChainViolation::PairMismatch { depth } => {
                write!(f, "revision at depth {depth} does not pair its versions")
            }
            ChainViolation::DocIdMismatch { index } => {
                write!(f, "revision at index {index} belongs to another document")
            }
        }
    }
}

/// Checks every chain invariant; an empty result means the chain is well formed.
pub fn validate_chain(chain: &RevisionChain) -> Vec<ChainViolation> {
    let mut out = Vec::new();
    for i in 1..chain.versions.len() {
        if chain.versions[i].timestamp < chain.versions[i - 1].timestamp {
            out.push(ChainViolation::OrderingViolation { index: i });
        }
    }
    let expected = chain.versions.len().saturating_sub(1);
    for (i, rev) in chain.revisions.iter().enumerate() {
        let want = i as u32 + 1;
        if rev.doc_id != chain.doc_id {
            out.push(ChainViolation::DocIdMismatch { index: i });
        }
        if i >= expected {
            out.push(ChainViolation::UnexpectedRevision { index: i, depth: rev.depth });
            continue;
        }
        if rev.depth != want {
            out.push(ChainViolation::DepthMismatch {
                index: i,
                expected: want,
                found: rev.depth,
            });
        }
        if rev.source_text != chain.versions[i].text || rev.target_text != chain.versions[i + 1].text {
            out.push(ChainViolation::PairMismatch { depth: want });
        }
    }
    for d in chain.revisions.len()..expected {
        out.push(ChainViolation::MissingRevision { depth: d as u32 + 1 });
    }
    out
}

// ---------------------------------------------------------------------------
// statistics
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthCounts {
    pub revisions: u64,
    pub edits: u64,
}

/// Per-(domain, depth) revision/edit counts and per-intention label counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusStats {
    pub by_domain_depth: BTreeMap<(Domain, u32), DepthCounts>,
    pub intention_counts: BTreeMap<EditIntention, u64>,
    pub unlabeled: u64,
}

impl CorpusStats {
    pub fn add(&mut self, rev: &Revision) {
        let cell = self.by_domain_depth.entry((rev.domain, rev.depth)).or_default();
        cell.revisions += 1;
        cell.edits += rev.actions.len() as u64;
        for a in &rev.actions {
            match a.intention {
                Some(i) => *self.intention_counts.entry(i).or_default() += 1,
                None => self.unlabeled += 1,
            }
        }
    }

    /// Associative, commutative merge of partial counts.
    pub fn merge(&mut self, other: &CorpusStats) {
        for (k, v) in &other.by_domain_depth {
            let cell = self.by_domain_depth.entry(*k).or_default();
            cell.revisions += v.revisions;
            cell.edits += v.edits;
        }
        for (k, v) in &other.intention_counts {
            *self.intention_counts.entry(*k).or_default() += v;
        }
        self.unlabeled += other.unlabeled;
    }

    pub fn labeled_total(&self) -> u64 {
        self.intention_counts.values().sum()
    }

    pub fn count(&self, intention: EditIntention) -> u64 {
        self.intention_counts.get(&intention).copied().unwrap_or(0)
    }

    /// count / labeled total; 0 when nothing is labeled.
    pub fn ratio(&self, intention: EditIntention) -> f64 {
        let total = self.labeled_total();
        if total == 0 {
            0.0
        } else {
            self.count(intention) as f64 / total as f64
        }
    }

    pub fn domain_total(&self, domain: Domain) -> DepthCounts {
        let mut t = DepthCounts::default();
        for ((d, _), v) in &self.by_domain_depth {
            if *d == domain {
                t.revisions += v.revisions;
                t.edits += v.edits;
            }
        }
        t
    }

    pub fn cell(&self, domain: Domain, depth: u32) -> DepthCounts {
        self.by_domain_depth.get(&(domain, depth)).copied().unwrap_or_default()
    }

    pub fn domains(&self) -> Vec<Domain> {
        let mut ds: Vec<Domain> = self.by_domain_depth.keys().map(|(d, _)| *d).collect();
        ds.dedup();
        ds
    }

    pub fn max_depth(&self) -> u32 {
        self.by_domain_depth.keys().map(|(_, t)| *t).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> Value {
        let mut domains = serde_json::Map::new();
        for d in self.domains() {
            let mut depths = serde_json::Map::new();
            for t in 1..=self.max_depth() {
                let c = self.cell(d, t);
                if c.revisions > 0 {
                    depths.insert(t.to_string(), serde_json::json!({"revisions": c.revisions, "edits": c.edits}));
                }
            }
            let tot = self.domain_total(d);
            domains.insert(
                d.as_str().to_string(),
                serde_json::json!({"depths": depths, "total": {"revisions": tot.revisions, "edits": tot.edits}}),
            );
        }
        let mut intents = serde_json::Map::new();
        for i in EditIntention::ALL {
            intents.insert(
                i.as_str().to_string(),
                serde_json::json!({"count": self.count(i), "ratio": self.ratio(i)}),
            );
        }
        serde_json::json!({
            "domains": domains,
            "intentions": intents,
            "labeled_total": self.labeled_total(),
            "unlabeled": self.unlabeled,
        })
    }

    /// Per-depth × per-domain matrix followed by the intention table.
    pub fn render_table(&self) -> String {
        let domains = self.domains();
        let mut s = String::new();
        s.push_str(&format!("{:>7}", "Depth"));
        for d in &domains {
            s.push_str(&format!(" | {:>9} {:>9}", format!("{} #D", d.display_name()), "#E"));
        }
        s.push('\n');
        for t in 1..=self.max_depth() {
            s.push_str(&format!("{:>7}", t));
            for d in &domains {
                let c = self.cell(*d, t);
                s.push_str(&format!(" | {:>9} {:>9}", group(c.revisions), group(c.edits)));
            }
            s.push('\n');
        }
        s.push_str(&format!("{:>7}", "Total"));
        for d in &domains {
            let c = self.domain_total(*d);
            s.push_str(&format!(" | {:>9} {:>9}", group(c.revisions), group(c.edits)));
        }
        s.push_str("\n\n");
        s.push_str(&format!("{:<16} {}\n", "Edit-Intention", "Counts (Ratio)"));
        for i in EditIntention::ALL {
            s.push_str(&format!(
                "{:<16} {} ({:.2}%)\n",
                i.display_name(),
                group(self.count(i)),
                100.0 * self.ratio(i)
            ));
        }
        s.push_str(&format!(
            "{:<16} {}\n{:<16} {}\n",
            "Labeled",
            group(self.labeled_total()),
            "Unlabeled",
            group(self.unlabeled)
        ));
        s
    }

    pub fn render_tsv(&self) -> String {
        let mut s = String::from("section\tkey\tdepth\trevisions_or_count\tedits_or_ratio\n");
        for ((d, t), c) in &self.by_domain_depth {
            s.push_str(&format!("depth\t{}\t{}\t{}\t{}\n", d.as_str(), t, c.revisions, c.edits));
        }
        for d in self.domains() {
            let c = self.domain_total(d);
            s.push_str(&format!("total\t{}\t-\t{}\t{}\n", d.as_str(), c.revisions, c.edits));
        }
        for i in EditIntention::ALL {
            s.push_str(&format!("intention\t{}\t-\t{}\t{:.6}\n", i.as_str(), self.count(i), self.ratio(i)));
        }
        s
    }
}

fn group(n: u64) -> String {
    let raw = n.to_string();
    let mut out = String::new();
    for (i, c) in raw.chars().enumerate() {
        if i > 0 && (raw.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    out
}

pub fn compute_stats<'a>(corpus: impl IntoIterator<Item = &'a Revision>) -> CorpusStats {
    let mut stats = CorpusStats::default();
    for rev in corpus {
        stats.add(rev);
    }
    stats
}

// ---------------------------------------------------------------------------
// JSONL wire format
// ---------------------------------------------------------------------------

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: invalid JSON: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// One edit action as written to JSONL. Offsets are character offsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionRecord {
    #[serde(alias = "type")]
    pub op: EditOp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub granularity: Option<Granularity>,
    #[serde(alias = "before", default, deserialize_with = "null_as_empty")]
    pub original: String,
    #[serde(alias = "after", default, deserialize_with = "null_as_empty")]
    pub revised: String,
    #[serde(alias = "start_char_pos")]
    pub src_start: usize,
    #[serde(alias = "end_char_pos")]
    pub src_end: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tgt_start: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tgt_end: Option<usize>,
    #[serde(alias = "major_intent", default, skip_serializing_if = "Option::is_none")]
    pub intention: Option<String>,
    #[serde(alias = "raw_intents", default, skip_serializing_if = "Option::is_none")]
    pub raw_labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_rounds: Option<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentence_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paragraph_index: Option<usize>,
}

fn null_as_empty<'de, D: serde::Deserializer<'de>>(d: D) -> Result<String, D::Error> {
    Ok(Option::<String>::deserialize(d)?.unwrap_or_default())
}

/// One revision pair as written to JSONL.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevisionRecord {
    pub doc_id: String,
    #[serde(alias = "revision_depth")]
    pub depth: u32,
    pub before_revision: String,
    pub after_revision: String,
    #[serde(default)]
    pub domain: String,
    #[serde(default)]
    pub edit_actions: Vec<ActionRecord>,
}

impl From<&Revision> for RevisionRecord {
    fn from(rev: &Revision) -> Self {
        RevisionRecord {
            doc_id: rev.doc_id.clone(),
            depth: rev.depth,
            before_revision: rev.source_text.clone(),
            after_revision: rev.target_text.clone(),
            domain: rev.domain.as_str().to_string(),
            edit_actions: rev
                .actions
                .iter()
                .map(|la| ActionRecord {
                    op: la.action.op,
                    granularity: Some(la.action.granularity),
                    original: la.action.original.clone(),
                    revised: la.action.revised.clone(),
                    src_start: la.action.src_range.start,
                    src_end: la.action.src_range.end,
                    tgt_start: Some(la.action.tgt_range.start),
                    tgt_end: Some(la.action.tgt_range.end),
                    intention: la.intention.map(|i| i.as_str().to_string()),
                    raw_labels: (!la.raw_labels.is_empty())
                        .then(|| la.raw_labels.iter().map(|i| i.as_str().to_string()).collect()),
                    label_rounds: (!la.label_rounds.is_empty()).then(|| la.label_rounds.clone()),
                    confidence: la.confidence,
                    sentence_index: la.action.sentence_index,
                    paragraph_index: la.action.paragraph_index,
                })
                .collect(),
        }
    }
}

fn parse_label(line: usize, s: &str) -> Result<EditIntention, FormatError> {
    s.parse().map_err(|e: UnknownIntention| FormatError::Schema {
        line,
        message: e.to_string(),
    })
}

impl RevisionRecord {
    /// Normalizes into a `Revision`, filling target offsets when the record
    /// only carries source offsets.
    pub fn into_revision(self, line: usize) -> Result<Revision, FormatError> {
        let src_len = self.before_revision.chars().count();
        let tgt_len = self.after_revision.chars().count();
        let mut actions = Vec::with_capacity(self.edit_actions.len());
        let mut shift: i64 = 0;
        for rec in self.edit_actions {
            if rec.src_start > rec.src_end || rec.src_end > src_len {
                return Err(FormatError::Schema {
                    line,
                    message: format!("source range {}..{} out of bounds", rec.src_start, rec.src_end),
                });
            }
            let tgt_start = match rec.tgt_start {
                Some(t) => t,
                None => (rec.src_start as i64 + shift).max(0) as usize,
            };
            let tgt_end = rec.tgt_end.unwrap_or(tgt_start + rec.revised.chars().count());
            if tgt_start > tgt_end || tgt_end > tgt_len {
                return Err(FormatError::Schema {
                    line,
                    message: format!("target range {tgt_start}..{tgt_end} out of bounds"),
                });
            }
            shift += (tgt_end - tgt_start) as i64 - (rec.src_end - rec.src_start) as i64;
            let intention = rec.intention.as_deref().map(|s| parse_label(line, s)).transpose()?;
            let raw_labels = rec
                .raw_labels
                .unwrap_or_default()
                .iter()
                .map(|s| parse_label(line, s))
                .collect::<Result<Vec<_>, _>>()?;
            actions.push(LabeledAction {
                action: EditAction {
                    op: rec.op,
                    granularity: rec.granularity.unwrap_or(Granularity::SentenceLevel),
                    original: rec.original,
                    revised: rec.revised,
                    src_range: rec.src_start..rec.src_end,
                    tgt_range: tgt_start..tgt_end,
                    sentence_index: rec.sentence_index,
                    paragraph_index: rec.paragraph_index,
                },
                intention,
                confidence: rec.confidence,
                raw_labels,
                label_rounds: rec.label_rounds.unwrap_or_default(),
            });
        }
        Ok(Revision {
            doc_id: self.doc_id,
            depth: self.depth,
            source_text: self.before_revision,
            target_text: self.after_revision,
            actions,
            domain: Domain::parse(&self.domain),
        })
    }
}

/// Parses one JSONL line in either the document layout (`before_revision` /
/// `after_revision` / `edit_actions`) or the sentence layout (`before_sent` /
/// `after_sent` with a single label).
pub fn parse_record(line_no: usize, line: &str) -> Result<Revision, FormatError> {
    let value: Value = serde_json::from_str(line).map_err(|source| FormatError::Json { line: line_no, source })?;
    if value.get("before_sent").is_some() {
        return parse_sentence_layout(line_no, value);
    }
    let rec: RevisionRecord =
        serde_json::from_value(value).map_err(|source| FormatError::Json { line: line_no, source })?;
    rec.into_revision(line_no)
}

fn parse_sentence_layout(line_no: usize, value: Value) -> Result<Revision, FormatError> {
    let get_str = |k: &str| value.get(k).and_then(Value::as_str).map(str::to_string);
    let before = get_str("before_sent").unwrap_or_default();
    let after = get_str("after_sent").unwrap_or_default();
    let doc_id = get_str("doc_id").unwrap_or_default();
    let depth = value
        .get("revision_depth")
        .or_else(|| value.get("depth"))
        .and_then(Value::as_u64)
        .unwrap_or(1) as u32;
    let domain = Domain::parse(&get_str("domain").unwrap_or_default());
    let label = get_str("labels").or_else(|| get_str("intention"));
    let intention = label.as_deref().map(|s| parse_label(line_no, s)).transpose()?;
    let mut actions = Vec::new();
    if let Some(a) = differing_span(&before, &after) {
        let mut la = LabeledAction::unlabeled(a);
        la.intention = intention;
        actions.push(la);
    }
    Ok(Revision {
        doc_id,
        depth,
        source_text: before,
        target_text: after,
        actions,
        domain,
    })
}

/// Single action covering the region where two texts differ, widened to
/// whitespace boundaries.
pub fn differing_span(before: &str, after: &str) -> Option<EditAction> {
    if before == after {
        return None;
    }
    let b: Vec<char> = before.chars().collect();
    let a: Vec<char> = after.chars().collect();
    let mut pre = 0;
    while pre < b.len() && pre < a.len() && b[pre] == a[pre] {
        pre += 1;
    }
    let mut suf = 0;
    while suf < b.len() - pre && suf < a.len() - pre && b[b.len() - 1 - suf] == a[a.len() - 1 - suf] {
        suf += 1;
    }
    while pre > 0 && !b[pre - 1].is_whitespace() {
        pre -= 1;
    }
    while suf > 0 && !b[b.len() - suf].is_whitespace() {
        suf -= 1;
    }
    let src = pre..b.len() - suf;
    let tgt = pre..a.len() - suf;
    let original: String = b[src.clone()].iter().collect();
    let revised: String = a[tgt.clone()].iter().collect();
    let op = EditOp::from_spans(&original, &revised)?;
    Some(EditAction {
        op,
        granularity: Granularity::SentenceLevel,
        original,
        revised,
        src_range: src,
        tgt_range: tgt,
        sentence_index: None,
        paragraph_index: None,
    })
}

/// Streaming reader over a JSONL corpus; blank lines are skipped.
pub fn read_jsonl<R: BufRead>(reader: R) -> impl Iterator<Item = Result<Revision, FormatError>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(i, line)| match line {
            Err(e) => Some(Err(FormatError::Io(e))),
            Ok(l) if l.trim().is_empty() => None,
            Ok(l) => Some(parse_record(i + 1, l.trim_start_matches('\u{feff}'))),
        })
}

pub fn write_jsonl<'a, W: Write>(
    mut writer: W,
    revisions: impl IntoIterator<Item = &'a Revision>,
) -> std::io::Result<()> {
    for rev in revisions {
        write_record(&mut writer, rev)?;
    }
    Ok(())
}

pub fn write_record<W: Write>(writer: &mut W, rev: &Revision) -> std::io::Result<()> {
    let rec = RevisionRecord::from(rev);
    serde_json::to_writer(&mut *writer, &rec)?;
    writer.write_all(b"\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn version(secs: i64, text: &str) -> Version {
        Version {
            timestamp: Utc.timestamp_opt(secs, 0).unwrap(),
            text: text.to_string(),
        }
    }

    fn staged(doc: &str, depth: u32, src: &str, tgt: &str) -> Revision {
        Revision {
            doc_id: doc.into(),
            depth,
            source_text: src.into(),
            target_text: tgt.into(),
            actions: vec![],
            domain: Domain::Other,
        }
    }

    fn chain3() -> RevisionChain {
        RevisionChain {
            doc_id: "d".into(),
            versions: vec![version(1, "a"), version(2, "b"), version(3, "c")],
            revisions: vec![staged("d", 1, "a", "b"), staged("d", 2, "b", "c")],
        }
    }

    #[test]
    fn well_formed_chain() {
        assert!(validate_chain(&chain3()).is_empty());
    }

    #[test]
    fn out_of_order_versions() {
        let mut c = chain3();
        c.versions[1].timestamp = Utc.timestamp_opt(10, 0).unwrap();
        assert_eq!(validate_chain(&c), vec![ChainViolation::OrderingViolation { index: 2 }]);
    }

    #[test]
    fn missing_revision() {
        let mut c = chain3();
        c.revisions.pop();
        assert_eq!(validate_chain(&c), vec![ChainViolation::MissingRevision { depth: 2 }]);
    }

    #[test]
    fn empty_stats() {
        let s = compute_stats(std::iter::empty());
        assert_eq!(s.labeled_total(), 0);
        assert_eq!(s.ratio(EditIntention::Fluency), 0.0);
        assert_eq!(s.domain_total(Domain::ArXiv), DepthCounts::default());
    }

    #[test]
    fn intention_parsing() {
        assert_eq!("Meaning-changed".parse::<EditIntention>().unwrap(), EditIntention::MeaningChanged);
        assert_eq!("meaning_changed".parse::<EditIntention>().unwrap(), EditIntention::MeaningChanged);
        assert_eq!(" CLARITY ".parse::<EditIntention>().unwrap(), EditIntention::Clarity);
        assert!("grammar".parse::<EditIntention>().is_err());
        assert!(!EditIntention::MeaningChanged.is_meaning_preserving());
        assert!(EditIntention::Style.is_meaning_preserving());
    }

    #[test]
    fn release_style_record() {
        let line = r#"{"doc_id":"x","revision_depth":2,"before_revision":"She went to the markt.","after_revision":"She went to the market.","domain":"wikinews","edit_actions":[{"type":"R","before":"markt","after":"market","start_char_pos":16,"end_char_pos":21,"major_intent":"fluency","raw_intents":["fluency","fluency","clarity"]}]}"#;
        let rev = parse_record(1, line).unwrap();
        assert_eq!(rev.depth, 2);
        assert_eq!(rev.domain, Domain::Wikinews);
        let a = &rev.actions[0];
        assert_eq!(a.action.op, EditOp::Modify);
        assert_eq!(a.action.tgt_range, 16..22);
        assert_eq!(a.intention, Some(EditIntention::Fluency));
        assert_eq!(a.raw_labels.len(), 3);
    }

    #[test]
    fn sentence_layout_record() {
        let line = r#"{"doc_id":"s","revision_depth":1,"before_sent":"The changes made the paper better than before.","after_sent":"The changes improved the paper.","labels":"clarity"}"#;
        let rev = parse_record(1, line).unwrap();
        assert_eq!(rev.actions.len(), 1);
        let a = &rev.actions[0].action;
        assert_eq!(a.original, "made the paper better than before.");
        assert_eq!(a.revised, "improved the paper.");
        assert_eq!(rev.actions[0].intention, Some(EditIntention::Clarity));
    }

    #[test]
    fn out_of_bounds_offsets_rejected() {
        let line = r#"{"doc_id":"x","depth":1,"before_revision":"ab","after_revision":"abc","domain":"arxiv","edit_actions":[{"op":"insert","original":"","revised":"c","src_start":5,"src_end":5}]}"#;
        assert!(matches!(parse_record(3, line), Err(FormatError::Schema { line: 3, .. })));
    }

    #[test]
    fn stats_table_groups_thousands() {
        assert_eq!(group(1177), "1,177");
        assert_eq!(group(31631), "31,631");
        assert_eq!(group(12), "12");
    }
}
