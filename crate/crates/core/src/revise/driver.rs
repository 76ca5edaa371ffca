//! The revision loop and its stopping criteria.

use std::fmt;

use serde::Serialize;

use super::{ReviseError, Reviser};
use crate::corpus::EditIntention;
use crate::metrics::distance::{edit_distance, DistanceUnit};
use crate::metrics::{evaluate_item, EvalOptions, MetricReport};

/// A named extra stopping rule over (previous text, revised text, metrics).
/// The report is `None` unless per-depth metrics are enabled.
pub struct StopPredicate {
    pub name: String,
    #[allow(clippy::type_complexity)]
    pub check: Box<dyn Fn(&str, &str, Option<&MetricReport>) -> bool + Send + Sync>,
}

impl fmt::Debug for StopPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StopPredicate").field("name", &self.name).finish_non_exhaustive()
    }
}

pub struct StoppingCriteria<'a> {
    pub max_depth: u32,
    pub min_edit_distance: usize,
    /// Unit of the recorded edit distance. Characters by default, so any
    /// change at all, whitespace included, keeps the loop going.
    pub distance_unit: DistanceUnit,
    pub predicates: Vec<StopPredicate>,
    /// Per-depth metrics; reference-free metrics only, since a loop has no references.
    pub metrics: Option<EvalOptions<'a>>,
}

impl Default for StoppingCriteria<'_> {
    fn default() -> Self {
        StoppingCriteria {
            max_depth: 10,
            min_edit_distance: 0,
            distance_unit: DistanceUnit::Char,
            predicates: Vec::new(),
            metrics: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum StopReason {
    DepthCutoff,
    Converged,
    CustomPredicate(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Iteration {
    pub depth: u32,
    pub text: String,
    pub edit_distance: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopTrace {
    pub doc_id: String,
    pub reviser: String,
    pub iterations: Vec<Iteration>,
    pub stop_reason: StopReason,
}

impl LoopTrace {
    pub fn depth(&self) -> usize {
        self.iterations.len()
    }

    pub fn final_text(&self) -> Option<&str> {
        self.iterations.last().map(|i| i.text.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{doc_id}: depth {depth}: {source}")]
pub struct LoopError {
    pub doc_id: String,
    pub depth: u32,
    pub source: ReviseError,
    /// Iterations completed before the failure.
    pub completed: Vec<Iteration>,
}

/// Where conditioning intentions come from.
pub trait IntentSource: Send + Sync {
    fn intents(&self, document: &str) -> Vec<EditIntention>;
}

impl IntentSource for Vec<EditIntention> {
    fn intents(&self, _: &str) -> Vec<EditIntention> {
        self.clone()
    }
}

impl<F: Fn(&str) -> Vec<EditIntention> + Send + Sync> IntentSource for F {
    fn intents(&self, document: &str) -> Vec<EditIntention> {
        self(document)
    }
}

/// Whether intentions are recomputed at every depth or fixed at depth 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntentRefresh {
    Once,
    #[default]
    Every,
}

#[derive(Default)]
pub struct Conditioning<'a> {
    pub source: Option<&'a dyn IntentSource>,
    pub refresh: IntentRefresh,
}

/// Revises `document` until the edit distance to the previous depth drops
/// to `min_edit_distance` (`Converged`), a predicate fires
/// (`CustomPredicate`), or `max_depth` is reached (`DepthCutoff`), checked
/// in that order after every depth.
pub fn run_iterative(
    doc_id: &str,
    reviser: &dyn Reviser,
    document: &str,
    criteria: &StoppingCriteria<'_>,
    conditioning: &Conditioning<'_>,
) -> Result<LoopTrace, LoopError> {
    let fail = |depth: u32, source: ReviseError, completed: Vec<Iteration>| LoopError {
        doc_id: doc_id.to_string(),
        depth,
        source,
        completed,
    };
    if document.trim().is_empty() {
        return Err(fail(0, ReviseError::EmptyDocument, Vec::new()));
    }
    if criteria.max_depth == 0 {
        return Err(fail(0, ReviseError::InvalidCriteria("max_depth must be at least 1".into()), Vec::new()));
    }
    let mut iterations: Vec<Iteration> = Vec::new();
    let mut previous = document.to_string();
    let mut fixed: Option<Vec<EditIntention>> = None;
    for depth in 1..=criteria.max_depth {
        let intents = conditioning.source.map(|s| match conditioning.refresh {
            IntentRefresh::Every => s.intents(&previous),
            IntentRefresh::Once => fixed.get_or_insert_with(|| s.intents(&previous)).clone(),
        });
        let revised = match reviser.revise(&previous, intents.as_deref(), depth) {
            Ok(t) => t,
            Err(e) => return Err(fail(depth, e, iterations)),
        };
        let distance = edit_distance(&previous, &revised, criteria.distance_unit);
        let metrics = match &criteria.metrics {
            Some(opts) => match evaluate_item(&previous, &revised, &[], opts) {
                Ok(r) => Some(r),
                Err(e) => return Err(fail(depth, ReviseError::InvalidCriteria(e.to_string()), iterations)),
            },
            None => None,
        };
        let fired = criteria
            .predicates
            .iter()
            .find(|p| (p.check)(&previous, &revised, metrics.as_ref()))
            .map(|p| p.name.clone());
        iterations.push(Iteration {
            depth,
            text: revised.clone(),
            edit_distance: distance,
            metrics,
        });
        let stop = if distance <= criteria.min_edit_distance {
            Some(StopReason::Converged)
        } else if let Some(name) = fired {
            Some(StopReason::CustomPredicate(name))
        } else if depth == criteria.max_depth {
            Some(StopReason::DepthCutoff)
        } else {
            None
        };
        if let Some(stop_reason) = stop {
            return Ok(LoopTrace {
                doc_id: doc_id.to_string(),
                reviser: reviser.name().to_string(),
                iterations,
                stop_reason,
            });
        }
        previous = revised;
    }
    unreachable!("the loop returns at max_depth")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::revise::IdentityReviser;

    struct Appender;

    impl Reviser for Appender {
        fn name(&self) -> &str {
            "appender"
        }
        fn revise(&self, d: &str, _: Option<&[EditIntention]>, _: u32) -> Result<String, ReviseError> {
            Ok(format!("{d} more"))
        }
    }

    #[test]
    fn identity_converges_at_one() {
        let t = run_iterative("d", &IdentityReviser, "Some text.", &StoppingCriteria::default(), &Conditioning::default()).unwrap();
        assert_eq!(t.depth(), 1);
        assert_eq!(t.stop_reason, StopReason::Converged);
        assert_eq!(t.iterations[0].edit_distance, 0);
    }

    #[test]
    fn appender_hits_cutoff() {
        let t = run_iterative("d", &Appender, "Some text.", &StoppingCriteria::default(), &Conditioning::default()).unwrap();
        assert_eq!(t.depth(), 10);
        assert_eq!(t.stop_reason, StopReason::DepthCutoff);
    }

    #[test]
    fn predicate_fires_by_name() {
        let criteria = StoppingCriteria {
            predicates: vec![StopPredicate {
                name: "long".into(),
                check: Box::new(|_, r, _| r.len() > 20),
            }],
            ..StoppingCriteria::default()
        };
        let t = run_iterative("d", &Appender, "Some text.", &criteria, &Conditioning::default()).unwrap();
        assert_eq!(t.stop_reason, StopReason::CustomPredicate("long".into()));
        assert_eq!(t.depth(), 3);
    }
}
