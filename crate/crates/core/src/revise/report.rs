//! Iterations-per-document statistics, as a text table and an SVG chart.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use super::LoopTrace;
use crate::corpus::Revision;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReviserIterations {
    pub documents: usize,
    pub mean: f64,
    /// Iteration count → number of documents.
    pub histogram: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterativenessReport {
    pub revisers: BTreeMap<String, ReviserIterations>,
}

fn summarize(counts: &[usize]) -> ReviserIterations {
    let mut histogram = BTreeMap::new();
    for &c in counts {
        *histogram.entry(c).or_insert(0) += 1;
    }
    ReviserIterations {
        documents: counts.len(),
        mean: counts.iter().sum::<usize>() as f64 / counts.len().max(1) as f64,
        histogram,
    }
}

/// Groups traces by reviser name. Extra named series (e.g. human chain
/// lengths) can be merged in with [`IterativenessReport::add_series`].
pub fn iterativeness_report(traces: &[LoopTrace]) -> IterativenessReport {
    let mut by: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for t in traces {
        by.entry(t.reviser.clone()).or_default().push(t.depth());
    }
    IterativenessReport {
        revisers: by.into_iter().map(|(k, v)| (k, summarize(&v))).collect(),
    }
}

/// Number of revisions per document, i.e. the length of each chain.
pub fn chain_lengths<'a>(revisions: impl IntoIterator<Item = &'a Revision>) -> Vec<usize> {
    let mut depths: BTreeMap<&str, BTreeSet<u32>> = BTreeMap::new();
    for r in revisions {
        depths.entry(&r.doc_id).or_default().insert(r.depth);
    }
    depths.values().map(BTreeSet::len).collect()
}

impl IterativenessReport {
    pub fn add_series(&mut self, name: &str, counts: &[usize]) {
        if !counts.is_empty() {
            self.revisers.insert(name.to_string(), summarize(counts));
        }
    }

    pub fn render(&self) -> String {
        let max = self.revisers.values().filter_map(|r| r.histogram.keys().last().copied()).max().unwrap_or(0);
        let mut out = format!("{:<20}{:>7}{:>7}", "reviser", "docs", "mean");
        for k in 1..=max {
            let _ = write!(out, "{k:>6}");
        }
        out.push('\n');
        for (name, r) in &self.revisers {
            let _ = write!(out, "{:<20}{:>7}{:>7.2}", name, r.documents, r.mean);
            for k in 1..=max {
                let _ = write!(out, "{:>6}", r.histogram.get(&k).copied().unwrap_or(0));
            }
            out.push('\n');
        }
        out
    }

    /// Grouped bars of document share per iteration count, one colour per reviser.
    pub fn to_svg(&self) -> String {
        const COLORS: &[&str] = &["#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860"];
        let max = self.revisers.values().filter_map(|r| r.histogram.keys().last().copied()).max().unwrap_or(1);
        let n = self.revisers.len().max(1);
        let (w, h, pad) = (60.0 * max as f64 + 80.0, 260.0, 40.0);
        let plot_h = h - 2.0 * pad;
        let group = (w - 2.0 * pad) / max as f64;
        let bar = group * 0.8 / n as f64;
        let mut s = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{:.0}\" font-family=\"sans-serif\" font-size=\"11\">\n",
            h + 20.0 * n as f64
        );
        let _ = writeln!(
            s,
            "<line x1=\"{pad}\" y1=\"{y}\" x2=\"{x2}\" y2=\"{y}\" stroke=\"black\"/>",
            y = h - pad,
            x2 = w - pad
        );
        for k in 1..=max {
            let x = pad + group * (k as f64 - 0.5);
            let _ = writeln!(s, "<text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{k}</text>", h - pad + 14.0);
        }
        for (ri, (name, r)) in self.revisers.iter().enumerate() {
            let color = COLORS[ri % COLORS.len()];
            for (&k, &c) in &r.histogram {
                let share = c as f64 / r.documents.max(1) as f64;
                let bh = share * plot_h;
                let x = pad + group * (k as f64 - 1.0) + group * 0.1 + bar * ri as f64;
                let _ = writeln!(
                    s,
                    "<rect x=\"{x:.1}\" y=\"{:.1}\" width=\"{bar:.1}\" height=\"{bh:.1}\" fill=\"{color}\"><title>{} {k}: {c}</title></rect>",
                    h - pad - bh,
                    escape(name)
                );
            }
            let ly = h + 14.0 * ri as f64;
            let _ = writeln!(s, "<rect x=\"{pad}\" y=\"{:.1}\" width=\"10\" height=\"10\" fill=\"{color}\"/>", ly - 9.0);
            let _ = writeln!(
                s,
                "<text x=\"{:.1}\" y=\"{ly:.1}\">{} (mean {:.2})</text>",
                pad + 14.0,
                escape(name),
                r.mean
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
