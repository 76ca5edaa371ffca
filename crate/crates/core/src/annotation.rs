//! Label aggregation and agreement statistics.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Domain, EditIntention, LabeledAction, Revision};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AgreementError {
    #[error("no items to measure")]
    Empty,
    #[error("at least two raters per item are required, got {0}")]
    TooFewRaters(usize),
    #[error("item {row} has {got} ratings, expected {expected}")]
    Ragged { row: usize, got: usize, expected: usize },
}

/// One raw label and the annotation round it came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub label: EditIntention,
    /// 1 = crowd, 2 = expert re-annotation.
    pub round: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationSet {
    /// Free-form reference to the annotated action, e.g. `doc#depth#index`.
    pub item: String,
    pub domain: Domain,
    /// Ordered by round.
    pub labels: Vec<Annotation>,
    /// Gold label when the corpus carries one.
    pub gold: Option<EditIntention>,
}

impl AnnotationSet {
    pub fn from_action(item: String, domain: Domain, la: &LabeledAction) -> Self {
        let mut labels: Vec<Annotation> = la
            .raw_labels
            .iter()
            .enumerate()
            .map(|(i, &label)| Annotation {
                label,
                round: la.label_rounds.get(i).copied().unwrap_or(1),
            })
            .collect();
        labels.sort_by_key(|a| a.round);
        AnnotationSet {
            item,
            domain,
            labels,
            gold: la.intention,
        }
    }

    pub fn raw(&self) -> Vec<EditIntention> {
        self.labels.iter().map(|a| a.label).collect()
    }

    pub fn round(&self, round: u8) -> Vec<EditIntention> {
        self.labels.iter().filter(|a| a.round == round).map(|a| a.label).collect()
    }

    /// Strict-majority label over all raw labels.
    pub fn resolved(&self) -> Option<EditIntention> {
        majority_vote(&self.raw())
    }

    /// Gold label if given, otherwise the majority of the raw labels.
    pub fn reference(&self) -> Option<EditIntention> {
        self.gold.or_else(|| self.resolved())
    }

    /// No strict majority among the first-round labels.
    pub fn needs_second_round(&self) -> bool {
        majority_vote(&self.round(1)).is_none()
    }
}

/// Annotation sets of every action with at least one raw label.
pub fn annotation_sets<'a>(revisions: impl IntoIterator<Item = &'a Revision>) -> Vec<AnnotationSet> {
    let mut out = Vec::new();
    for r in revisions {
        for (i, la) in r.actions.iter().enumerate() {
            if !la.raw_labels.is_empty() {
                out.push(AnnotationSet::from_action(format!("{}#{}#{}", r.doc_id, r.depth, i), r.domain, la));
            }
        }
    }
    out
}

/// Label held by strictly more than half of `labels`.
pub fn majority_vote(labels: &[EditIntention]) -> Option<EditIntention> {
    let mut counts = [0usize; EditIntention::ALL.len()];
    for l in labels {
        counts[l.index()] += 1;
    }
    EditIntention::ALL
        .into_iter()
        .find(|l| 2 * counts[l.index()] > labels.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Kappa {
    pub value: f64,
    /// Expected agreement was 1 (one category only); the value is 1.0 by convention.
    pub degenerate: bool,
}

/// Fleiss' κ over an items × categories count matrix with `n` raters per item.
pub fn fleiss_kappa(matrix: &[Vec<usize>], n: usize) -> Result<Kappa, AgreementError> {
    if matrix.is_empty() {
        return Err(AgreementError::Empty);
    }
    if n < 2 {
        return Err(AgreementError::TooFewRaters(n));
    }
    let k = matrix.iter().map(Vec::len).max().unwrap_or(0);
    let mut col = vec![0usize; k];
    let mut agree_sum = 0.0;
    for (row, counts) in matrix.iter().enumerate() {
        let got: usize = counts.iter().sum();
        if got != n {
            return Err(AgreementError::Ragged { row, got, expected: n });
        }
        let pairs: usize = counts.iter().map(|&c| c * c.saturating_sub(1)).sum();
        agree_sum += pairs as f64 / (n * (n - 1)) as f64;
        for (j, &c) in counts.iter().enumerate() {
            col[j] += c;
        }
    }
    let items = matrix.len() as f64;
    let p_bar = agree_sum / items;
    let total = items * n as f64;
    let p_e: f64 = col.iter().map(|&c| (c as f64 / total).powi(2)).sum();
    if (1.0 - p_e).abs() < 1e-15 {
        return Ok(Kappa {
            value: 1.0,
            degenerate: true,
        });
    }
    if (1.0 - p_bar).abs() < 1e-15 {
        return Ok(Kappa {
            value: 1.0,
            degenerate: false,
        });
    }
    Ok(Kappa {
        value: (p_bar - p_e) / (1.0 - p_e),
        degenerate: false,
    })
}

/// Items × intentions count matrix from per-item label lists.
pub fn count_matrix(items: &[Vec<EditIntention>]) -> Vec<Vec<usize>> {
    items
        .iter()
        .map(|labels| {
            let mut row = vec![0usize; EditIntention::ALL.len()];
            for l in labels {
                row[l.index()] += 1;
            }
            row
        })
        .collect()
}

/// κ over label lists that must all have the same length.
pub fn kappa_of_labels(items: &[Vec<EditIntention>]) -> Result<Kappa, AgreementError> {
    let n = items.first().map_or(0, Vec::len);
    fleiss_kappa(&count_matrix(items), n)
}

/// How second-round labels enter the κ computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundMode {
    /// Only first-round labels.
    FirstRound,
    /// The last three labels of each item, so re-annotations replace crowd labels.
    Replace,
    /// Every label of every round; rejected when items end up with unequal counts.
    Augment,
}

impl RoundMode {
    pub fn label(self) -> &'static str {
        match self {
            RoundMode::FirstRound => "1st-round",
            RoundMode::Replace => "2nd-round (replace)",
            RoundMode::Augment => "2nd-round (augment)",
        }
    }

    fn select(self, set: &AnnotationSet) -> Vec<EditIntention> {
        match self {
            RoundMode::FirstRound => set.round(1),
            RoundMode::Replace => {
                let raw = set.raw();
                raw[raw.len().saturating_sub(3)..].to_vec()
            }
            RoundMode::Augment => set.raw(),
        }
    }
}

pub fn round_kappa(sets: &[&AnnotationSet], mode: RoundMode) -> Result<Kappa, AgreementError> {
    let items: Vec<Vec<EditIntention>> = sets
        .iter()
        .map(|s| mode.select(s))
        .filter(|l| mode != RoundMode::FirstRound || !l.is_empty())
        .collect();
    kappa_of_labels(&items)
}

/// κ per domain and overall for each round interpretation.
#[derive(Debug, Clone, PartialEq)]
pub struct AgreementTable {
    pub domains: Vec<Domain>,
    /// (row label, per-domain result, overall result); errors render as n/a.
    pub rows: Vec<(String, Vec<Result<Kappa, AgreementError>>, Result<Kappa, AgreementError>)>,
}

pub fn agreement_table(sets: &[AnnotationSet], by_domain: bool) -> AgreementTable {
    let mut domains: Vec<Domain> = Vec::new();
    if by_domain {
        for s in sets {
            if !domains.contains(&s.domain) {
                domains.push(s.domain);
            }
        }
        domains.sort();
    }
    let mut rows = Vec::new();
    for mode in [RoundMode::FirstRound, RoundMode::Replace, RoundMode::Augment] {
        let per: Vec<_> = domains
            .iter()
            .map(|d| {
                let sub: Vec<&AnnotationSet> = sets.iter().filter(|s| s.domain == *d).collect();
                round_kappa(&sub, mode)
            })
            .collect();
        let all: Vec<&AnnotationSet> = sets.iter().collect();
        rows.push((mode.label().to_string(), per, round_kappa(&all, mode)));
    }
    AgreementTable { domains, rows }
}

impl AgreementTable {
    pub fn render(&self) -> String {
        let mut header = vec![String::new()];
        header.extend(self.domains.iter().map(|d| d.display_name().to_string()));
        header.push("All".into());
        let cell = |r: &Result<Kappa, AgreementError>| match r {
            Ok(k) => format!("{:.4}", k.value),
            Err(_) => "n/a".into(),
        };
        let mut lines = vec![header];
        for (label, per, all) in &self.rows {
            let mut row = vec![label.clone()];
            row.extend(per.iter().map(cell));
            row.push(cell(all));
            lines.push(row);
        }
        let widths: Vec<usize> = (0..lines[0].len())
            .map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for l in &lines {
            let cells: Vec<String> = l
                .iter()
                .enumerate()
                .map(|(c, v)| if c == 0 { format!("{v:<w$}", w = widths[c]) } else { format!("{v:>w$}", w = widths[c]) })
                .collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let cell = |r: &Result<Kappa, AgreementError>| match r {
            Ok(k) => serde_json::json!({"kappa": k.value, "degenerate": k.degenerate}),
            Err(e) => serde_json::json!({"kappa": null, "error": e.to_string()}),
        };
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|(label, per, all)| {
                let mut m = serde_json::Map::new();
                m.insert("round".into(), label.clone().into());
                for (d, r) in self.domains.iter().zip(per) {
                    m.insert(d.as_str().into(), cell(r));
                }
                m.insert("all".into(), cell(all));
                serde_json::Value::Object(m)
            })
            .collect();
        serde_json::Value::Array(rows)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisagreementRow {
    pub total: usize,
    /// Sets where at least one raw label differs from the reference label.
    pub without_consensus: usize,
    pub dissent_counts: BTreeMap<EditIntention, usize>,
    /// `dissent_counts` normalized over all dissenting label occurrences.
    pub dissent_share: BTreeMap<EditIntention, f64>,
}

/// Per reference label: how often annotators dissented, and toward what.
pub fn disagreement_profile(sets: &[AnnotationSet]) -> BTreeMap<EditIntention, DisagreementRow> {
    let mut out: BTreeMap<EditIntention, DisagreementRow> = BTreeMap::new();
    for s in sets {
        let Some(gold) = s.reference() else { continue };
        let row = out.entry(gold).or_insert_with(|| DisagreementRow {
            total: 0,
            without_consensus: 0,
            dissent_counts: BTreeMap::new(),
            dissent_share: BTreeMap::new(),
        });
        row.total += 1;
        let mut dissent = false;
        for a in &s.labels {
            if a.label != gold {
                dissent = true;
                *row.dissent_counts.entry(a.label).or_insert(0) += 1;
            }
        }
        row.without_consensus += usize::from(dissent);
    }
    for row in out.values_mut() {
        let n: usize = row.dissent_counts.values().sum();
        row.dissent_share = row
            .dissent_counts
            .iter()
            .map(|(&l, &c)| (l, c as f64 / n as f64))
            .collect();
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QualityVote {
    OriginalBetter,
    RevisedBetter,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityJudgment {
    pub item: String,
    #[serde(default)]
    pub group: String,
    pub votes: [QualityVote; 3],
}

impl QualityJudgment {
    /// 1 for a RevisedBetter majority, −1 for OriginalBetter, 0 otherwise.
    pub fn score(&self) -> i8 {
        let count = |v| self.votes.iter().filter(|&&x| x == v).count();
        if count(QualityVote::RevisedBetter) >= 2 {
            1
        } else if count(QualityVote::OriginalBetter) >= 2 {
            -1
        } else {
            0
        }
    }
}

/// Mean score per group.
pub fn aggregate_quality(judgments: &[QualityJudgment]) -> BTreeMap<String, f64> {
    let mut acc: BTreeMap<String, (i64, usize)> = BTreeMap::new();
    for j in judgments {
        let e = acc.entry(j.group.clone()).or_insert((0, 0));
        e.0 += i64::from(j.score());
        e.1 += 1;
    }
    acc.into_iter().map(|(g, (s, n))| (g, s as f64 / n as f64)).collect()
}
