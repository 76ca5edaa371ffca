//! Iterative revision: a reviser is applied depth after depth until a
//! stopping criterion fires.

pub mod driver;
pub mod external;
pub mod report;
pub mod rules;

use thiserror::Error;

use crate::corpus::EditIntention;

pub use driver::{run_iterative, Conditioning, IntentRefresh, IntentSource, Iteration, LoopError, LoopTrace, StopPredicate, StopReason, StoppingCriteria};
pub use external::ExecReviser;
pub use report::{iterativeness_report, chain_lengths, IterativenessReport};
pub use rules::{RuleConfig, RuleReviser};

pub const DEFAULT_INTENT_TEMPLATE: &str = "<{intent}> {text}";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReviseError {
    #[error("template {0:?} must contain {{intent}} and {{text}}")]
    BadTemplate(String),
    #[error("invalid rule config: {0}")]
    InvalidRuleConfig(String),
    #[error("reviser failed: {0}")]
    ReviserFailure(String),
    #[error("document is empty")]
    EmptyDocument,
    #[error("invalid stopping criteria: {0}")]
    InvalidCriteria(String),
}

/// A text revision system. Implementations must be deterministic in
/// `(document, conditioning, depth)`.
pub trait Reviser: Send + Sync {
    fn name(&self) -> &str;
    fn revise(&self, document: &str, conditioning: Option<&[EditIntention]>, depth: u32) -> Result<String, ReviseError>;
}

/// Returns its input unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityReviser;

impl Reviser for IdentityReviser {
    fn name(&self) -> &str {
        "identity"
    }

    fn revise(&self, document: &str, _: Option<&[EditIntention]>, _: u32) -> Result<String, ReviseError> {
        Ok(document.to_string())
    }
}

pub fn check_template(template: &str) -> Result<(), ReviseError> {
    if template.contains("{intent}") && template.contains("{text}") {
        Ok(())
    } else {
        Err(ReviseError::BadTemplate(template.to_string()))
    }
}

/// Prefixes `document` with its intentions through `template`. No
/// intentions leave the document as is.
pub fn condition_input(document: &str, intents: &[EditIntention], template: &str) -> Result<String, ReviseError> {
    check_template(template)?;
    if intents.is_empty() {
        return Ok(document.to_string());
    }
    let joined = intents.iter().map(|i| i.as_str()).collect::<Vec<_>>().join(" ");
    // substitute {text} last so braces inside the document survive
    Ok(template.replace("{intent}", &joined).replacen("{text}", document, 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_template() {
        let doc = "Some text.";
        assert_eq!(
            condition_input(doc, &[EditIntention::Fluency], DEFAULT_INTENT_TEMPLATE).unwrap(),
            "<fluency> Some text."
        );
        assert_eq!(
            condition_input(doc, &[EditIntention::Fluency, EditIntention::Clarity], DEFAULT_INTENT_TEMPLATE).unwrap(),
            "<fluency clarity> Some text."
        );
        assert_eq!(condition_input(doc, &[], "[{intent}] {text}").unwrap(), doc);
    }

    #[test]
    fn template_needs_text_slot() {
        assert!(matches!(condition_input("x", &[], "<{intent}>"), Err(ReviseError::BadTemplate(_))));
    }
}
