//! Fetches revision histories from MediaWiki wikis and ArXiv, loads local
//! version files, and stages them as revision chains.

pub mod arxiv;
pub mod cache;
pub mod chain;
pub mod http;
pub mod local;
pub mod wiki;
pub mod wikitext;

use std::time::Duration;

use chrono::{DateTime, Utc};
use thiserror::Error;

use revkit_core::corpus::Domain;

pub use arxiv::{fetch_arxiv_versions, parse_arxiv_id, ArxivId};
pub use cache::Cache;
pub use chain::build_chain;
pub use http::{Fetcher, HttpResponse, HttpTransport, RateLimiter, UreqTransport};
pub use local::{load_local_dir, read_seed_list};
pub use wiki::fetch_wiki_history;
pub use wikitext::parse_wikitext;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("network error for {url}: {message}")]
    Network { url: String, message: String },
    #[error("rate limited by {url} after {attempts} attempt(s)")]
    RateLimited { url: String, attempts: u32 },
    #[error("page not found: {0}")]
    PageNotFound(String),
    #[error("paper not found: {0}")]
    PaperNotFound(String),
    #[error("malformed ArXiv id {0:?}")]
    MalformedId(String),
    #[error("no versions to build a chain from")]
    EmptyHistory,
    #[error("versions belong to different documents: {0:?} and {1:?}")]
    MixedIdentifiers(String, String),
    #[error("unexpected response from {url}: {message}")]
    Format { url: String, message: String },
    #[error("invalid fetch policy: {0}")]
    InvalidPolicy(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl IngestError {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        IngestError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    Wikipedia,
    Wikinews,
    ArXiv,
    LocalFile,
}

impl Source {
    pub fn parse(s: &str) -> Option<Source> {
        match s.to_ascii_lowercase().as_str() {
            "wikipedia" => Some(Source::Wikipedia),
            "wikinews" => Some(Source::Wikinews),
            "arxiv" => Some(Source::ArXiv),
            "local" | "localfile" => Some(Source::LocalFile),
            _ => None,
        }
    }

    pub fn domain(self) -> Domain {
        match self {
            Source::Wikipedia => Domain::Wikipedia,
            Source::Wikinews => Domain::Wikinews,
            Source::ArXiv => Domain::ArXiv,
            Source::LocalFile => Domain::Other,
        }
    }

    /// Default API endpoint.
    pub fn endpoint(self) -> Option<&'static str> {
        match self {
            Source::Wikipedia => Some("https://en.wikipedia.org/w/api.php"),
            Source::Wikinews => Some("https://en.wikinews.org/w/api.php"),
            Source::ArXiv => Some("http://export.arxiv.org/api/query"),
            Source::LocalFile => None,
        }
    }

    pub fn is_wiki(self) -> bool {
        matches!(self, Source::Wikipedia | Source::Wikinews)
    }
}

/// One saved version as delivered by its source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawVersion {
    pub source: Source,
    /// Page title, paper id or local document id.
    pub identifier: String,
    pub timestamp: DateTime<Utc>,
    /// Wiki revision id or ArXiv/local version number; breaks timestamp ties.
    pub revision_id: u64,
    pub raw_payload: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FetchPolicy {
    pub max_versions_per_doc: usize,
    /// Requests per second per endpoint.
    pub request_rate_limit: f64,
    pub max_attempts: u32,
    pub backoff_base: Duration,
}

impl Default for FetchPolicy {
    fn default() -> Self {
        FetchPolicy {
            max_versions_per_doc: 5,
            request_rate_limit: 1.0,
            max_attempts: 4,
            backoff_base: Duration::from_millis(500),
        }
    }
}

impl FetchPolicy {
    pub fn validate(&self) -> Result<(), IngestError> {
        if self.max_versions_per_doc < 2 {
            return Err(IngestError::InvalidPolicy("max_versions_per_doc must be at least 2".into()));
        }
        if !(self.request_rate_limit > 0.0) {
            return Err(IngestError::InvalidPolicy("request_rate_limit must be positive".into()));
        }
        if self.max_attempts == 0 {
            return Err(IngestError::InvalidPolicy("max_attempts must be at least 1".into()));
        }
        Ok(())
    }
}

/// Sorts ascending by (timestamp, revision id) and keeps the newest `max`.
pub(crate) fn keep_newest(mut versions: Vec<RawVersion>, max: usize) -> Vec<RawVersion> {
    versions.sort_by(|a, b| (a.timestamp, a.revision_id).cmp(&(b.timestamp, b.revision_id)));
    let drop = versions.len().saturating_sub(max);
    versions.drain(..drop);
    versions
}

/// Fetches many documents concurrently; the fetcher's rate limiter keeps
/// requests per endpoint within policy. Results keep the input order.
pub fn fetch_many(
    fetcher: &Fetcher,
    source: Source,
    endpoint: &str,
    ids: &[String],
) -> Vec<(String, Result<Vec<RawVersion>, IngestError>)> {
    use rayon::prelude::*;
    ids.par_iter()
        .map(|id| {
            let r = match source {
                Source::ArXiv => fetch_arxiv_versions(fetcher, endpoint, id),
                Source::Wikipedia | Source::Wikinews => fetch_wiki_history(fetcher, endpoint, id, source),
                Source::LocalFile => Err(IngestError::InvalidPolicy("local files are loaded, not fetched".into())),
            };
            (id.clone(), r)
        })
        .collect()
}
