//! Per-class precision, recall and F1 from a confusion matrix.

use std::fmt::Write as _;

use serde::Serialize;

use crate::corpus::EditIntention;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelMetrics {
    pub label: EditIntention,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    /// Row and column order of `confusion`.
    pub labels: Vec<EditIntention>,
    /// `confusion[gold][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    /// Labels that occur as gold or prediction.
    pub per_label: Vec<LabelMetrics>,
    /// Mean F1 over labels with gold support.
    pub macro_f1: f64,
    pub accuracy: f64,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

pub fn evaluate_predictions(gold: &[EditIntention], pred: &[EditIntention]) -> EvalReport {
    assert_eq!(gold.len(), pred.len(), "gold and predicted lengths differ");
    let labels: Vec<EditIntention> = EditIntention::ALL.to_vec();
    let k = labels.len();
    let mut confusion = vec![vec![0usize; k]; k];
    for (g, p) in gold.iter().zip(pred) {
        confusion[g.index()][p.index()] += 1;
    }
    let mut per_label = Vec::new();
    let mut f1_sum = 0.0;
    let mut with_support = 0;
    for (i, &label) in labels.iter().enumerate() {
        let tp = confusion[i][i];
        let support: usize = confusion[i].iter().sum();
        let predicted: usize = confusion.iter().map(|r| r[i]).sum();
        if support == 0 && predicted == 0 {
            continue;
        }
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, support);
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        if support > 0 {
            f1_sum += f1;
            with_support += 1;
        }
        per_label.push(LabelMetrics {
            label,
            precision,
            recall,
            f1,
            support,
        });
    }
    let correct: usize = (0..k).map(|i| confusion[i][i]).sum();
    EvalReport {
        labels,
        confusion,
        per_label,
        macro_f1: if with_support == 0 { 0.0 } else { f1_sum / with_support as f64 },
        accuracy: ratio(correct, gold.len()),
    }
}

pub fn macro_f1(gold: &[EditIntention], pred: &[EditIntention]) -> f64 {
    evaluate_predictions(gold, pred).macro_f1
}

/// Macro-F1 of always predicting the most frequent training label.
pub fn majority_baseline(train_labels: &[EditIntention], eval_gold: &[EditIntention]) -> (EditIntention, f64) {
    let mut counts = [0usize; EditIntention::ALL.len()];
    for l in train_labels {
        counts[l.index()] += 1;
    }
    let majority = EditIntention::ALL
        .into_iter()
        .max_by_key(|l| (counts[l.index()], std::cmp::Reverse(l.index())))
        .unwrap_or(EditIntention::Clarity);
    let pred = vec![majority; eval_gold.len()];
    (majority, macro_f1(eval_gold, &pred))
}

impl EvalReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<16}{:>10}{:>10}{:>10}{:>9}", "label", "precision", "recall", "f1", "support");
        for m in &self.per_label {
            let _ = writeln!(
                out,
                "{:<16}{:>10.4}{:>10.4}{:>10.4}{:>9}",
                m.label.display_name(),
                m.precision,
                m.recall,
                m.f1,
                m.support
            );
        }
        let _ = writeln!(out, "{:<16}{:>30.4}", "macro-F1", self.macro_f1);
        let _ = writeln!(out, "{:<16}{:>30.4}", "accuracy", self.accuracy);
        out
    }
}
