//! MediaWiki Action API revision histories.

use chrono::{DateTime, Utc};
use serde_json::Value;
use url::Url;

use crate::http::{Fetched, Fetcher};
use crate::{keep_newest, IngestError, RawVersion, Source};

pub fn history_url(endpoint: &str, title: &str, limit: usize) -> Result<String, IngestError> {
    let mut u = Url::parse(endpoint).map_err(|e| IngestError::Format {
        url: endpoint.into(),
        message: e.to_string(),
    })?;
    u.query_pairs_mut()
        .append_pair("action", "query")
        .append_pair("prop", "revisions")
        .append_pair("titles", title)
        .append_pair("rvprop", "timestamp|ids|content")
        .append_pair("rvslots", "main")
        .append_pair("rvlimit", &limit.to_string())
        .append_pair("format", "json");
    Ok(u.into())
}

/// The newest `max_versions_per_doc` revisions of `title`, oldest first.
pub fn fetch_wiki_history(fetcher: &Fetcher, endpoint: &str, title: &str, source: Source) -> Result<Vec<RawVersion>, IngestError> {
    if title.trim().is_empty() {
        return Err(IngestError::PageNotFound(String::new()));
    }
    let max = fetcher.policy.max_versions_per_doc;
    let url = history_url(endpoint, title, max)?;
    let body = match fetcher.get(&url, &[endpoint, title, &format!("history:{max}")])? {
        Fetched::Body(b) => b,
        Fetched::NotFound => return Err(IngestError::PageNotFound(title.into())),
    };
    let versions = parse_history_json(&body, title, source).map_err(|message| IngestError::Format { url: url.clone(), message })?;
    match versions {
        Some(v) => Ok(keep_newest(v, max)),
        None => Err(IngestError::PageNotFound(title.into())),
    }
}

/// Parses both `formatversion=1` and `=2` responses. `None` means the page
/// does not exist.
pub fn parse_history_json(body: &str, title: &str, source: Source) -> Result<Option<Vec<RawVersion>>, String> {
    let v: Value = serde_json::from_str(body).map_err(|e| e.to_string())?;
    if let Some(err) = v.get("error") {
        return Err(format!(
            "{}: {}",
            err.get("code").and_then(Value::as_str).unwrap_or("error"),
            err.get("info").and_then(Value::as_str).unwrap_or("")
        ));
    }
    let pages: Vec<&Value> = match v.pointer("/query/pages") {
        Some(Value::Object(m)) => m.values().collect(),
        Some(Value::Array(a)) => a.iter().collect(),
        _ => return Err("response has no query.pages".into()),
    };
    let Some(page) = pages.first() else {
        return Ok(None);
    };
    if page.get("missing").is_some() || page.get("invalid").is_some() {
        return Ok(None);
    }
    let identifier = page.get("title").and_then(Value::as_str).unwrap_or(title).to_string();
    let mut out = Vec::new();
    for rev in page.get("revisions").and_then(Value::as_array).into_iter().flatten() {
        let content = rev
            .pointer("/slots/main/content")
            .or_else(|| rev.pointer("/slots/main/*"))
            .or_else(|| rev.get("*"))
            .or_else(|| rev.get("content"))
            .and_then(Value::as_str);
        let Some(content) = content else {
            // hidden or deleted text
            continue;
        };
        let ts = rev.get("timestamp").and_then(Value::as_str).ok_or("revision without timestamp")?;
        let timestamp: DateTime<Utc> = DateTime::parse_from_rfc3339(ts)
            .map_err(|e| format!("timestamp {ts:?}: {e}"))?
            .with_timezone(&Utc);
        out.push(RawVersion {
            source,
            identifier: identifier.clone(),
            timestamp,
            revision_id: rev.get("revid").and_then(Value::as_u64).unwrap_or(0),
            raw_payload: content.to_string(),
        });
    }
    Ok(Some(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn url_has_the_documented_parameters() {
        let u = history_url("https://en.wikipedia.org/w/api.php", "Café au lait", 5).unwrap();
        assert!(u.contains("action=query") && u.contains("rvslots=main") && u.contains("rvlimit=5"));
        assert!(u.contains("rvprop=timestamp%7Cids%7Ccontent"));
        assert!(u.contains("titles=Caf%C3%A9+au+lait"));
    }

    #[test]
    fn both_format_versions() {
        let v1 = r#"{"query":{"pages":{"12":{"pageid":12,"title":"A","revisions":[
            {"revid":2,"timestamp":"2021-01-02T00:00:00Z","slots":{"main":{"*":"new"}}},
            {"revid":1,"timestamp":"2021-01-01T00:00:00Z","slots":{"main":{"*":"old"}}}]}}}}"#;
        let v2 = r#"{"query":{"pages":[{"pageid":12,"title":"A","revisions":[
            {"revid":2,"timestamp":"2021-01-02T00:00:00Z","slots":{"main":{"content":"new"}}}]}]}}"#;
        assert_eq!(parse_history_json(v1, "A", Source::Wikipedia).unwrap().unwrap().len(), 2);
        assert_eq!(parse_history_json(v2, "A", Source::Wikipedia).unwrap().unwrap()[0].raw_payload, "new");
        let missing = r#"{"query":{"pages":{"-1":{"ns":0,"title":"Nope","missing":""}}}}"#;
        assert_eq!(parse_history_json(missing, "Nope", Source::Wikipedia).unwrap(), None);
        let missing2 = r#"{"query":{"pages":[{"title":"Nope","missing":true}]}}"#;
        assert_eq!(parse_history_json(missing2, "Nope", Source::Wikipedia).unwrap(), None);
    }
}
