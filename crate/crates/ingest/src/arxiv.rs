//! ArXiv abstracts per submitted version, via the Atom query API.

use std::sync::LazyLock;

use chrono::{DateTime, Utc};
use regex::Regex;
use url::Url;

use crate::http::{Fetched, Fetcher};
use crate::{IngestError, RawVersion, Source};

const ATOM: &str = "http://www.w3.org/2005/Atom";

static NEW_ID: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(\d{4}\.\d{4,5})(?:v(\d+))?$").unwrap());
static OLD_ID: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^([a-z]+(?:-[a-z]+)*(?:\.[A-Z]{2})?/\d{7})(?:v(\d+))?$").unwrap());

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArxivId {
    pub base: String,
    pub version: Option<u32>,
}

/// Accepts `2103.14972`, `2103.14972v3`, `cs/0112017` or `math.GT/0309136v2`,
/// optionally prefixed with `arXiv:`.
pub fn parse_arxiv_id(s: &str) -> Result<ArxivId, IngestError> {
    let t = s.trim();
    let t = t.strip_prefix("arXiv:").or_else(|| t.strip_prefix("arxiv:")).unwrap_or(t);
    let caps = NEW_ID
        .captures(t)
        .or_else(|| OLD_ID.captures(t))
        .ok_or_else(|| IngestError::MalformedId(s.to_string()))?;
    Ok(ArxivId {
        base: caps[1].to_string(),
        version: caps.get(2).and_then(|v| v.as_str().parse().ok()),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomEntry {
    pub id: ArxivId,
    pub updated: DateTime<Utc>,
    pub summary: String,
}

/// The first entry of a feed; `None` when the feed reports no such paper.
pub fn parse_atom(xml: &str) -> Result<Option<AtomEntry>, String> {
    let doc = roxmltree::Document::parse(xml).map_err(|e| e.to_string())?;
    let child_text = |n: roxmltree::Node, name: &str| {
        n.children()
            .find(|c| c.has_tag_name((ATOM, name)))
            .and_then(|c| c.text())
            .map(str::to_string)
    };
    let Some(entry) = doc.root_element().children().find(|c| c.has_tag_name((ATOM, "entry"))) else {
        return Ok(None);
    };
    let id_url = child_text(entry, "id").unwrap_or_default();
    if id_url.contains("/api/errors") || child_text(entry, "title").as_deref() == Some("Error") {
        return Ok(None);
    }
    let raw_id = id_url.rsplit_once("/abs/").map_or(id_url.as_str(), |(_, id)| id);
    let id = parse_arxiv_id(raw_id).map_err(|e| e.to_string())?;
    let updated = child_text(entry, "updated").ok_or("entry without <updated>")?;
    let updated = DateTime::parse_from_rfc3339(updated.trim())
        .map_err(|e| format!("timestamp {updated:?}: {e}"))?
        .with_timezone(&Utc);
    let summary = child_text(entry, "summary").unwrap_or_default();
    Ok(Some(AtomEntry {
        id,
        updated,
        summary: summary.split_whitespace().collect::<Vec<_>>().join(" "),
    }))
}

fn query_url(api: &str, id: &str) -> Result<String, IngestError> {
    let mut u = Url::parse(api).map_err(|e| IngestError::Format {
        url: api.into(),
        message: e.to_string(),
    })?;
    u.query_pairs_mut().append_pair("id_list", id);
    Ok(u.into())
}

fn fetch_entry(fetcher: &Fetcher, api: &str, id: &str) -> Result<Option<AtomEntry>, IngestError> {
    let url = query_url(api, id)?;
    match fetcher.get(&url, &[api, id, "abstract"])? {
        Fetched::NotFound => Ok(None),
        Fetched::Body(b) => parse_atom(&b).map_err(|message| IngestError::Format { url, message }),
    }
}

/// Abstracts of the newest `max_versions_per_doc` versions, oldest first.
/// Only abstracts are fetched, never full texts.
pub fn fetch_arxiv_versions(fetcher: &Fetcher, api: &str, paper_id: &str) -> Result<Vec<RawVersion>, IngestError> {
    let id = parse_arxiv_id(paper_id)?;
    let latest = match id.version {
        Some(v) => v,
        None => {
            let e = fetch_entry(fetcher, api, &id.base)?.ok_or_else(|| IngestError::PaperNotFound(id.base.clone()))?;
            e.id.version.unwrap_or(1)
        }
    };
    let first = latest.saturating_sub(fetcher.policy.max_versions_per_doc as u32 - 1).max(1);
    let mut out = Vec::new();
    for v in first..=latest {
        let vid = format!("{}v{v}", id.base);
        let e = fetch_entry(fetcher, api, &vid)?.ok_or_else(|| IngestError::PaperNotFound(vid.clone()))?;
        out.push(RawVersion {
            source: Source::ArXiv,
            identifier: id.base.clone(),
            timestamp: e.updated,
            revision_id: u64::from(v),
            raw_payload: e.summary,
        });
    }
    Ok(crate::keep_newest(out, fetcher.policy.max_versions_per_doc))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn id_grammar() {
        assert_eq!(parse_arxiv_id("2103.14972").unwrap().base, "2103.14972");
        assert_eq!(parse_arxiv_id("arXiv:2103.14972v4").unwrap().version, Some(4));
        assert_eq!(parse_arxiv_id("cs/0112017").unwrap().base, "cs/0112017");
        assert_eq!(parse_arxiv_id("math.GT/0309136v2").unwrap().version, Some(2));
        assert_eq!(parse_arxiv_id("hep-th/9901001").unwrap().version, None);
        for bad in ["abc", "2103.149", "cs/011201", "2103.14972v", ""] {
            assert!(matches!(parse_arxiv_id(bad), Err(IngestError::MalformedId(_))), "{bad}");
        }
    }

    #[test]
    fn atom_entry_and_error_feed() {
        let xml = r#"<?xml version="1.0" encoding="UTF-8"?>
<feed xmlns="http://www.w3.org/2005/Atom"><entry>
<id>http://arxiv.org/abs/2103.14972v4</id><updated>2021-05-01T10:00:00Z</updated>
<title>T</title><summary>  Line one
 line two. </summary></entry></feed>"#;
        let e = parse_atom(xml).unwrap().unwrap();
        assert_eq!(e.id.version, Some(4));
        assert_eq!(e.summary, "Line one line two.");
        let err = r#"<feed xmlns="http://www.w3.org/2005/Atom"><entry><id>http://arxiv.org/api/errors#incorrect_id_format_for_x</id><title>Error</title><updated>2021-05-01T10:00:00Z</updated></entry></feed>"#;
        assert_eq!(parse_atom(err).unwrap(), None);
        assert_eq!(parse_atom(r#"<feed xmlns="http://www.w3.org/2005/Atom"></feed>"#).unwrap(), None);
    }
}
