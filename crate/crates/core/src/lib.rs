//! Core library for iterative text revision corpora: data model, edit
//! extraction, annotation statistics, metrics, intent classification and
//! the revise loop.

pub mod annotation;
pub mod corpus;
pub mod diff;
pub mod fixture;
pub mod intent;
pub mod metrics;
pub mod revise;
pub mod synth;
pub mod text;
