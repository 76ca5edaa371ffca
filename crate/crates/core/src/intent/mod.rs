//! Edit-intention classification: features, model, split and evaluation.

pub mod eval;
pub mod features;
pub mod model;
pub mod split;

use thiserror::Error;

use crate::corpus::{EditIntention, Revision};
pub use model::{train, ClassifierModel, Example, Prediction, TrainConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntentError {
    #[error("training data covers {0} trainable label(s); at least 2 are required")]
    DegenerateData(usize),
    #[error("too few examples{}: {count} (need at least 3 per class)", label.map(|l| format!(" for {}", l.display_name())).unwrap_or_default())]
    TooFewExamples { label: Option<EditIntention>, count: usize },
    #[error("model feature schema {model:?} does not match {expected:?}")]
    SchemaMismatch { model: String, expected: String },
    #[error("model file: {0}")]
    ModelFormat(String),
}

/// Labeled examples of every human-labeled action (the `Other` class included).
pub fn labeled_examples<'a>(revisions: impl IntoIterator<Item = &'a Revision>) -> Vec<Example> {
    let mut out = Vec::new();
    for r in revisions {
        for la in &r.actions {
            if let (Some(label), None) = (la.intention, la.confidence) {
                out.push(Example::new(&la.action, &r.source_text, label));
            }
        }
    }
    out
}

/// Fills every unlabeled action with a prediction; human labels are kept.
/// Returns the number of predictions added.
pub fn annotate_revision(model: &ClassifierModel, revision: &mut Revision) -> Result<usize, IntentError> {
    model.check_schema()?;
    let mut added = 0;
    for la in revision.actions.iter_mut().filter(|a| a.intention.is_none()) {
        let p = model.predict(&la.action, &revision.source_text)?;
        la.intention = Some(p.label);
        la.confidence = Some(p.confidence);
        added += 1;
    }
    Ok(added)
}

/// Lazily annotates a stream of revisions.
pub fn auto_annotate<'m, I>(model: &'m ClassifierModel, corpus: I) -> impl Iterator<Item = Result<Revision, IntentError>> + 'm
where
    I: IntoIterator<Item = Revision>,
    I::IntoIter: 'm,
{
    corpus.into_iter().map(move |mut r| {
        annotate_revision(model, &mut r)?;
        Ok(r)
    })
}
