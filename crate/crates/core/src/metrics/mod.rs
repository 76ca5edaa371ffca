//! Document quality and model comparison metrics.

pub mod bleu;
pub mod distance;
pub mod entity_grid;
pub mod fkgl;
pub mod lm;
pub mod rouge;
pub mod sari;
pub mod slor;

use std::collections::HashMap;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use self::distance::DistanceUnit;
use self::lm::LanguageModel;

/// Tokenization applied before every n-gram metric.
pub const TOKENIZATION: &str = "unicode-word-bounds, punctuation split, lowercased";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("document has no sentences or words")]
    EmptyDocument,
    #[error("sentence has no tokens")]
    EmptySentence,
    #[error("at least one reference is required")]
    EmptyReferences,
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("n-gram order must be in 1..=5, got {0}")]
    InvalidOrder(usize),
    #[error("language model file: {0}")]
    ModelFormat(String),
    #[error("SLOR needs a language model")]
    MissingModel,
    #[error("unknown metric {0:?}")]
    UnknownMetric(String),
}

pub(crate) fn ngrams<'a>(toks: &[&'a str], n: usize) -> Vec<Vec<&'a str>> {
    if toks.len() < n {
        return Vec::new();
    }
    toks.windows(n).map(<[&str]>::to_vec).collect()
}

/// Character n-gram F-score (chrF, n = 1..6, β = 2) in [0, 100], the
/// content preservation proxy.
pub fn chrf(hypothesis: &str, reference: &str) -> f64 {
    const MAX_N: usize = 6;
    const BETA2: f64 = 4.0;
    let h: Vec<char> = hypothesis.chars().filter(|c| !c.is_whitespace()).collect();
    let r: Vec<char> = reference.chars().filter(|c| !c.is_whitespace()).collect();
    if h.is_empty() && r.is_empty() {
        return 100.0;
    }
    let (mut p_sum, mut r_sum, mut orders) = (0.0, 0.0, 0usize);
    for n in 1..=MAX_N {
        if h.len() < n && r.len() < n {
            break;
        }
        let mut rc: HashMap<&[char], usize> = HashMap::new();
        for g in r.windows(n) {
            *rc.entry(g).or_insert(0) += 1;
        }
        let mut hits = 0;
        let mut hyp_total = 0;
        for g in h.windows(n) {
            hyp_total += 1;
            if let Some(c) = rc.get_mut(g) {
                if *c > 0 {
                    *c -= 1;
                    hits += 1;
                }
            }
        }
        let ref_total = r.len().saturating_sub(n - 1);
        p_sum += if hyp_total > 0 { hits as f64 / hyp_total as f64 } else { 0.0 };
        r_sum += if ref_total > 0 { hits as f64 / ref_total as f64 } else { 0.0 };
        orders += 1;
    }
    let p = p_sum / orders as f64;
    let r = r_sum / orders as f64;
    if p + r == 0.0 {
        return 0.0;
    }
    100.0 * (1.0 + BETA2) * p * r / (BETA2 * p + r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Sari,
    Bleu,
    Rouge,
    Fkgl,
    Slor,
    EntityGrid,
    Distance,
    ContentPreservation,
}

impl Metric {
    pub const ALL: [Metric; 8] = [
        Metric::Sari,
        Metric::Bleu,
        Metric::Rouge,
        Metric::Fkgl,
        Metric::Slor,
        Metric::EntityGrid,
        Metric::Distance,
        Metric::ContentPreservation,
    ];

    /// Parses a comma-separated list such as `sari,bleu,rouge`.
    pub fn parse_list(s: &str) -> Result<Vec<Metric>, MetricError> {
        let mut out: Vec<Metric> = s
            .split(',')
            .map(str::trim)
            .filter(|x| !x.is_empty())
            .map(Metric::from_str)
            .collect::<Result<_, _>>()?;
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl FromStr for Metric {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_lowercase().as_str() {
            "sari" => Metric::Sari,
            "bleu" => Metric::Bleu,
            "rouge" => Metric::Rouge,
            "fkgl" => Metric::Fkgl,
            "slor" => Metric::Slor,
            "eg" | "entity_grid" => Metric::EntityGrid,
            "dist" | "distance" => Metric::Distance,
            "cp" | "chrf" | "content" => Metric::ContentPreservation,
            _ => return Err(MetricError::UnknownMetric(s.to_string())),
        })
    }
}

/// Metric values for one item or a corpus mean; absent metrics are `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MetricReport {
    #[serde(rename = "SARI")]
    pub sari: Option<f64>,
    #[serde(rename = "ADD")]
    pub sari_add: Option<f64>,
    #[serde(rename = "DEL")]
    pub sari_del: Option<f64>,
    #[serde(rename = "KEEP")]
    pub sari_keep: Option<f64>,
    #[serde(rename = "BLEU")]
    pub bleu: Option<f64>,
    #[serde(rename = "R-1")]
    pub rouge1: Option<f64>,
    #[serde(rename = "R-2")]
    pub rouge2: Option<f64>,
    #[serde(rename = "R-L")]
    pub rouge_l: Option<f64>,
    #[serde(rename = "FKGL")]
    pub fkgl: Option<f64>,
    #[serde(rename = "SLOR")]
    pub slor: Option<f64>,
    #[serde(rename = "EG")]
    pub entity_grid: Option<f64>,
    #[serde(rename = "Dist")]
    pub edit_distance: Option<f64>,
    #[serde(rename = "ContentPreservation")]
    pub content_preservation: Option<f64>,
    #[serde(rename = "Avg")]
    pub avg: Option<f64>,
}

impl MetricReport {
    fn fields_mut(&mut self) -> [&mut Option<f64>; 14] {
        [
            &mut self.sari,
            &mut self.sari_add,
            &mut self.sari_del,
            &mut self.sari_keep,
            &mut self.bleu,
            &mut self.rouge1,
            &mut self.rouge2,
            &mut self.rouge_l,
            &mut self.fkgl,
            &mut self.slor,
            &mut self.entity_grid,
            &mut self.edit_distance,
            &mut self.content_preservation,
            &mut self.avg,
        ]
    }

    /// Mean of SARI, BLEU and R-L when all three are present.
    fn fill_avg(&mut self) {
        self.avg = match (self.sari, self.bleu, self.rouge_l) {
            (Some(s), Some(b), Some(r)) => Some((s + b + r) / 3.0),
            _ => None,
        };
    }

    /// Field-wise mean; a field is present if present in every report.
    pub fn mean(reports: &[MetricReport]) -> MetricReport {
        let mut out = MetricReport::default();
        if reports.is_empty() {
            return out;
        }
        let mut copies: Vec<MetricReport> = reports.to_vec();
        let columns: Vec<Vec<Option<f64>>> = copies
            .iter_mut()
            .map(|r| r.fields_mut().into_iter().map(|f| *f).collect())
            .collect();
        for (i, slot) in out.fields_mut().into_iter().enumerate() {
            let vals: Option<Vec<f64>> = columns.iter().map(|c| c[i]).collect();
            *slot = vals.map(|v| v.iter().sum::<f64>() / v.len() as f64);
        }
        out.fill_avg();
        out
    }
}

pub struct EvalOptions<'a> {
    pub metrics: Vec<Metric>,
    pub lm: Option<&'a dyn LanguageModel>,
    pub distance_unit: DistanceUnit,
}

impl Default for EvalOptions<'_> {
    fn default() -> Self {
        EvalOptions {
            metrics: vec![Metric::Sari, Metric::Bleu, Metric::Rouge],
            lm: None,
            distance_unit: DistanceUnit::Token,
        }
    }
}

/// Scores one prediction. Document metrics (FKGL, SLOR, EG) describe the
/// prediction itself; distance and content preservation compare it with the source.
pub fn evaluate_item(
    source: &str,
    prediction: &str,
    references: &[&str],
    opts: &EvalOptions<'_>,
) -> Result<MetricReport, MetricError> {
    let mut r = MetricReport::default();
    for m in &opts.metrics {
        match m {
            Metric::Sari => {
                let s = sari::sari(source, prediction, references)?;
                r.sari = Some(s.sari);
                r.sari_add = Some(s.add);
                r.sari_del = Some(s.del);
                r.sari_keep = Some(s.keep);
            }
            Metric::Bleu => r.bleu = Some(bleu::sentence_bleu(prediction, references)?),
            Metric::Rouge => {
                if references.is_empty() {
                    return Err(MetricError::EmptyReferences);
                }
                let s = rouge::rouge_multi(prediction, references);
                r.rouge1 = Some(s.r1);
                r.rouge2 = Some(s.r2);
                r.rouge_l = Some(s.rl);
            }
            Metric::Fkgl => r.fkgl = Some(fkgl::fkgl(prediction)?),
            Metric::Slor => r.slor = Some(slor::document_slor(prediction, opts.lm.ok_or(MetricError::MissingModel)?)?),
            Metric::EntityGrid => r.entity_grid = Some(entity_grid::entity_grid_score(prediction).score),
            Metric::Distance => r.edit_distance = Some(distance::edit_distance(source, prediction, opts.distance_unit) as f64),
            Metric::ContentPreservation => r.content_preservation = Some(chrf(prediction, source)),
        }
    }
    r.fill_avg();
    Ok(r)
}

pub struct EvalItem<'a> {
    pub source: &'a str,
    pub prediction: &'a str,
    pub references: Vec<&'a str>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusReport {
    pub items: usize,
    /// Mean of per-item scores (sentence-level BLEU is smoothed).
    pub sentence_mean: MetricReport,
    /// Pooled-count BLEU, unsmoothed.
    pub corpus_bleu: Option<f64>,
    /// Pooled-count ROUGE against each item's best reference.
    pub corpus_rouge: Option<[f64; 3]>,
    pub tokenization: &'static str,
}

pub fn evaluate_corpus(items: &[EvalItem<'_>], opts: &EvalOptions<'_>) -> Result<CorpusReport, MetricError> {
    let reports: Vec<MetricReport> = items
        .iter()
        .map(|it| evaluate_item(it.source, it.prediction, &it.references, opts))
        .collect::<Result<_, _>>()?;
    let corpus_bleu = if opts.metrics.contains(&Metric::Bleu) {
        let pairs: Vec<(&str, Vec<&str>)> = items.iter().map(|i| (i.prediction, i.references.clone())).collect();
        Some(bleu::corpus_bleu(&pairs)?)
    } else {
        None
    };
    let corpus_rouge = opts.metrics.contains(&Metric::Rouge).then(|| {
        let mut total = rouge::RougeCounts::default();
        for it in items {
            total.add(&rouge::best_reference_counts(it.prediction, &it.references));
        }
        let s = total.score();
        [s.r1, s.r2, s.rl]
    });
    Ok(CorpusReport {
        items: items.len(),
        sentence_mean: MetricReport::mean(&reports),
        corpus_bleu,
        corpus_rouge,
        tokenization: TOKENIZATION,
    })
}

/// Revised-minus-original quality deltas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaReport {
    pub delta_slor: Option<f64>,
    pub delta_eg: f64,
    pub delta_fkgl: f64,
    pub content_preservation: f64,
}

pub fn delta_report(original: &str, revised: &str, lm: Option<&dyn LanguageModel>) -> Result<DeltaReport, MetricError> {
    let delta_slor = match lm {
        Some(lm) => Some(slor::document_slor(revised, lm)? - slor::document_slor(original, lm)?),
        None => None,
    };
    Ok(DeltaReport {
        delta_slor,
        delta_eg: entity_grid::entity_grid_score(revised).score - entity_grid::entity_grid_score(original).score,
        delta_fkgl: fkgl::fkgl(revised)? - fkgl::fkgl(original)?,
        content_preservation: chrf(revised, original),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chrf_bounds() {
        assert_eq!(chrf("same text", "same text"), 100.0);
        assert_eq!(chrf("abc", "xyz"), 0.0);
        let v = chrf("the cat sat", "the cat sat down");
        assert!(v > 0.0 && v < 100.0);
    }

    #[test]
    fn metric_list_parsing() {
        let m = Metric::parse_list("sari,bleu, rouge,eg,dist").unwrap();
        assert_eq!(m.len(), 5);
        assert!(Metric::parse_list("sari,meteor").is_err());
    }

    #[test]
    fn avg_is_mean_of_three() {
        let r = evaluate_item("a b c d", "a b x d", &["a b x d e"], &EvalOptions::default()).unwrap();
        let avg = (r.sari.unwrap() + r.bleu.unwrap() + r.rouge_l.unwrap()) / 3.0;
        assert!((r.avg.unwrap() - avg).abs() < 1e-12);
    }
}
