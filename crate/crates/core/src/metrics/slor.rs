//! Syntactic log-odds ratio.

use super::lm::LanguageModel;
use super::MetricError;
use crate::text::{normalized_tokens, segment_sentences};

/// `(log P_lm(S) − Σ log P_uni(t)) / |S|` over normalized tokens.
pub fn slor(sentence: &str, lm: &dyn LanguageModel) -> Result<f64, MetricError> {
    slor_tokens(&normalized_tokens(sentence), lm)
}

pub fn slor_tokens(tokens: &[String], lm: &dyn LanguageModel) -> Result<f64, MetricError> {
    if tokens.is_empty() {
        return Err(MetricError::EmptySentence);
    }
    let uni: f64 = tokens.iter().map(|t| lm.unigram_log_prob(t)).sum();
    Ok((lm.log_prob(tokens) - uni) / tokens.len() as f64)
}

/// Mean sentence SLOR of a document.
pub fn document_slor(document: &str, lm: &dyn LanguageModel) -> Result<f64, MetricError> {
    let scores: Vec<f64> = segment_sentences(document)
        .iter()
        .map(|s| normalized_tokens(&s.text))
        .filter(|t| !t.is_empty())
        .map(|t| slor_tokens(&t, lm))
        .collect::<Result<_, _>>()?;
    if scores.is_empty() {
        return Err(MetricError::EmptyDocument);
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}
