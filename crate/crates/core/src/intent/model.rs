//! Multinomial logistic regression over edit features.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::eval::macro_f1;
use super::features::{extract_features, FEATURE_NAMES, FEATURE_SCHEMA_VERSION};
use super::IntentError;
use crate::corpus::{EditAction, EditIntention};

pub const MODEL_KIND: &str = "multinomial-logistic";

/// One training or evaluation row.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub features: Vec<f64>,
    pub label: EditIntention,
}

impl Example {
    pub fn new(action: &EditAction, source_text: &str, label: EditIntention) -> Self {
        Example {
            features: extract_features(action, source_text).0,
            label,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub seed: u64,
    pub max_epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub batch_size: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    /// Predictions below this confidence become `Other`.
    pub other_floor: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            seed: 13,
            max_epochs: 200,
            learning_rate: 0.05,
            l2: 1e-4,
            batch_size: 32,
            patience: 15,
            other_floor: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub kind: String,
    pub schema_version: String,
    pub labels: Vec<EditIntention>,
    pub feature_names: Vec<String>,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    /// Row-major `labels × (features + 1)`; the last column is the bias.
    pub weights: Vec<f64>,
    pub other_floor: f64,
    pub epochs_trained: usize,
    pub validation_macro_f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: EditIntention,
    pub confidence: f64,
    pub distribution: Vec<(EditIntention, f64)>,
}

fn softmax(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

/// Class probabilities for standardized input `x` under row-major weights.
pub fn probabilities(weights: &[f64], k: usize, x: &[f64]) -> Vec<f64> {
    let d = x.len() + 1;
    let mut z: Vec<f64> = (0..k)
        .map(|c| {
            let row = &weights[c * d..(c + 1) * d];
            row[..x.len()].iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + row[x.len()]
        })
        .collect();
    softmax(&mut z);
    z
}

/// Weighted mean cross-entropy plus `l2/2·‖W‖²` (bias excluded), and its gradient.
pub fn loss_and_grad(weights: &[f64], k: usize, xs: &[Vec<f64>], ys: &[usize], sample_w: &[f64], l2: f64) -> (f64, Vec<f64>) {
    let d = xs.first().map_or(0, Vec::len) + 1;
    let mut grad = vec![0.0; weights.len()];
    let total_w: f64 = sample_w.iter().sum();
    let mut loss = 0.0;
    for ((x, &y), &w) in xs.iter().zip(ys).zip(sample_w) {
        let p = probabilities(weights, k, x);
        loss -= w * p[y].max(1e-300).ln();
        for c in 0..k {
            let err = w * (p[c] - f64::from(u8::from(c == y)));
            let row = &mut grad[c * d..(c + 1) * d];
            for (g, v) in row[..d - 1].iter_mut().zip(x) {
                *g += err * v;
            }
            row[d - 1] += err;
        }
    }
    loss /= total_w;
    for g in grad.iter_mut() {
        *g /= total_w;
    }
    for c in 0..k {
        for j in 0..d - 1 {
            let w = weights[c * d + j];
            loss += 0.5 * l2 * w * w;
            grad[c * d + j] += l2 * w;
        }
    }
    (loss, grad)
}

fn standardize(x: &[f64], means: &[f64], scales: &[f64]) -> Vec<f64> {
    x.iter().zip(means).zip(scales).map(|((v, m), s)| (v - m) / s).collect()
}

impl ClassifierModel {
    pub fn predict_features(&self, features: &[f64]) -> Prediction {
        let x = standardize(features, &self.means, &self.scales);
        let p = probabilities(&self.weights, self.labels.len(), &x);
        let (best, &confidence) = p
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .expect("non-empty label set");
        let label = if confidence < self.other_floor {
            EditIntention::Other
        } else {
            self.labels[best]
        };
        Prediction {
            label,
            confidence,
            distribution: self.labels.iter().copied().zip(p).collect(),
        }
    }

    pub fn check_schema(&self) -> Result<(), IntentError> {
        if self.schema_version != FEATURE_SCHEMA_VERSION || self.feature_names.len() != FEATURE_NAMES.len() {
            return Err(IntentError::SchemaMismatch {
                model: self.schema_version.clone(),
                expected: FEATURE_SCHEMA_VERSION.to_string(),
            });
        }
        Ok(())
    }

    pub fn predict(&self, action: &EditAction, source_text: &str) -> Result<Prediction, IntentError> {
        self.check_schema()?;
        Ok(self.predict_features(&extract_features(action, source_text).0))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self, IntentError> {
        let m: ClassifierModel = serde_json::from_str(s).map_err(|e| IntentError::ModelFormat(e.to_string()))?;
        let d = m.feature_names.len() + 1;
        if m.kind != MODEL_KIND || m.weights.len() != m.labels.len() * d || m.means.len() != d - 1 || m.scales.len() != d - 1 {
            return Err(IntentError::ModelFormat("inconsistent model dimensions".into()));
        }
        Ok(m)
    }
}

/// Trains with minibatch SGD, keeping the parameters with the best
/// validation macro-F1 (training macro-F1 when validation is empty).
pub fn train(train_set: &[Example], validation: &[Example], cfg: &TrainConfig) -> Result<ClassifierModel, IntentError> {
    let labels: Vec<EditIntention> = EditIntention::TRAINABLE.to_vec();
    let rows: Vec<&Example> = train_set.iter().filter(|e| labels.contains(&e.label)).collect();
    let mut present: Vec<EditIntention> = rows.iter().map(|e| e.label).collect();
    present.sort();
    present.dedup();
    if present.len() < 2 {
        return Err(IntentError::DegenerateData(present.len()));
    }
    let nf = rows[0].features.len();
    let n = rows.len() as f64;
    let means: Vec<f64> = (0..nf).map(|j| rows.iter().map(|e| e.features[j]).sum::<f64>() / n).collect();
    let scales: Vec<f64> = (0..nf)
        .map(|j| {
            let var = rows.iter().map(|e| (e.features[j] - means[j]).powi(2)).sum::<f64>() / n;
            if var > 1e-12 { var.sqrt() } else { 1.0 }
        })
        .collect();
    let xs: Vec<Vec<f64>> = rows.iter().map(|e| standardize(&e.features, &means, &scales)).collect();
    let ys: Vec<usize> = rows.iter().map(|e| labels.iter().position(|l| *l == e.label).unwrap()).collect();
    let mut class_n = vec![0usize; labels.len()];
    for &y in &ys {
        class_n[y] += 1;
    }
    let sample_w: Vec<f64> = ys
        .iter()
        .map(|&y| n / (present.len() as f64 * class_n[y] as f64))
        .collect();

    let k = labels.len();
    let d = nf + 1;
    let mut model = ClassifierModel {
        kind: MODEL_KIND.into(),
        schema_version: FEATURE_SCHEMA_VERSION.into(),
        labels: labels.clone(),
        feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        means,
        scales,
        weights: vec![0.0; k * d],
        other_floor: cfg.other_floor,
        epochs_trained: 0,
        validation_macro_f1: 0.0,
    };
    let val: Vec<&Example> = if validation.is_empty() { rows.clone() } else { validation.iter().collect() };
    let score = |m: &ClassifierModel| {
        let gold: Vec<EditIntention> = val.iter().map(|e| e.label).collect();
        let pred: Vec<EditIntention> = val.iter().map(|e| m.predict_features(&e.features).label).collect();
        macro_f1(&gold, &pred)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut best = (score(&model), model.weights.clone(), 0usize);
    let mut stale = 0;
    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let lr = cfg.learning_rate / (1.0 + 0.01 * epoch as f64);
        for batch in order.chunks(cfg.batch_size.max(1)) {
            let bx: Vec<Vec<f64>> = batch.iter().map(|&i| xs[i].clone()).collect();
            let by: Vec<usize> = batch.iter().map(|&i| ys[i]).collect();
            let bw: Vec<f64> = batch.iter().map(|&i| sample_w[i]).collect();
            let (_, g) = loss_and_grad(&model.weights, k, &bx, &by, &bw, cfg.l2);
            for (w, gi) in model.weights.iter_mut().zip(&g) {
                *w -= lr * gi;
            }
        }
        let s = score(&model);
        if s > best.0 + 1e-12 {
            best = (s, model.weights.clone(), epoch);
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
    }
    model.weights = best.1;
    model.validation_macro_f1 = best.0;
    model.epochs_trained = best.2;
    Ok(model)
}
