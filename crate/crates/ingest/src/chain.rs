//! Staging version histories as revision chains.

use revkit_core::corpus::{Revision, RevisionChain, Version};

use crate::wikitext::parse_wikitext;
use crate::{IngestError, RawVersion};

/// Sorts the versions, converts wiki markup to text, collapses consecutive
/// identical texts, and pairs neighbours as revisions at depths 1..n-1.
/// Revisions carry no actions yet; edit extraction fills them in.
pub fn build_chain(mut versions: Vec<RawVersion>) -> Result<RevisionChain, IngestError> {
    let first = versions.first().ok_or(IngestError::EmptyHistory)?;
    let doc_id = first.identifier.clone();
    let domain = first.source.domain();
    if let Some(other) = versions.iter().find(|v| v.identifier != doc_id) {
        return Err(IngestError::MixedIdentifiers(doc_id, other.identifier.clone()));
    }
    versions.sort_by(|a, b| (a.timestamp, a.revision_id).cmp(&(b.timestamp, b.revision_id)));
    let mut kept: Vec<Version> = Vec::new();
    for v in versions {
        let text = if v.source.is_wiki() {
            parse_wikitext(&v.raw_payload)
        } else {
            v.raw_payload.trim_end().to_string()
        };
        if kept.last().is_some_and(|k| k.text == text) {
            continue;
        }
        kept.push(Version {
            timestamp: v.timestamp,
            text,
        });
    }
    let revisions = kept
        .windows(2)
        .enumerate()
        .map(|(i, w)| Revision {
            doc_id: doc_id.clone(),
            depth: i as u32 + 1,
            source_text: w[0].text.clone(),
            target_text: w[1].text.clone(),
            actions: Vec::new(),
            domain,
        })
        .collect();
    Ok(RevisionChain {
        doc_id,
        versions: kept,
        revisions,
    })
}
