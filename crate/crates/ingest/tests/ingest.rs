use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use chrono::DateTime;
use proptest::prelude::*;

use revkit_core::corpus::validate_chain;
use revkit_ingest::wikitext::parse_wikitext_counted;
use revkit_ingest::{
    build_chain, fetch_arxiv_versions, fetch_many, fetch_wiki_history, load_local_dir, parse_wikitext, Cache, FetchPolicy,
    Fetcher, HttpResponse, HttpTransport, IngestError, RawVersion, Source,
};

type Handler = dyn Fn(&str, usize) -> Result<HttpResponse, String> + Send + Sync;

struct Mock {
    calls: Arc<AtomicUsize>,
    handler: Box<Handler>,
}

impl HttpTransport for Mock {
    fn get(&self, url: &str) -> Result<HttpResponse, String> {
        let n = self.calls.fetch_add(1, Ordering::SeqCst);
        (self.handler)(url, n)
    }
}

fn ok(body: String) -> Result<HttpResponse, String> {
    Ok(HttpResponse {
        status: 200,
        body,
        retry_after: None,
    })
}

fn status(code: u16) -> Result<HttpResponse, String> {
    Ok(HttpResponse {
        status: code,
        body: String::new(),
        retry_after: None,
    })
}

fn fetcher(handler: impl Fn(&str, usize) -> Result<HttpResponse, String> + Send + Sync + 'static, cache: Option<Cache>) -> (Fetcher, Arc<AtomicUsize>) {
    let calls = Arc::new(AtomicUsize::new(0));
    let policy = FetchPolicy {
        request_rate_limit: 1e6,
        backoff_base: Duration::ZERO,
        ..FetchPolicy::default()
    };
    let mut f = Fetcher::new(
        Box::new(Mock {
            calls: calls.clone(),
            handler: Box::new(handler),
        }),
        policy,
        cache,
    )
    .unwrap();
    f.sleep = |_| {};
    (f, calls)
}

/// A formatversion=2 history of `n` revisions, newest first, truncated to rvlimit.
fn history(url: &str, n: usize) -> String {
    let limit: usize = url.split("rvlimit=").nth(1).and_then(|s| s.split('&').next()).unwrap().parse().unwrap();
    let revs: Vec<String> = (1..=n)
        .rev()
        .take(limit)
        .map(|i| format!(r#"{{"revid":{i},"timestamp":"2021-01-{i:02}T00:00:00Z","slots":{{"main":{{"content":"Version {i} of the [[page]]."}}}}}}"#))
        .collect();
    format!(r#"{{"query":{{"pages":[{{"pageid":1,"title":"Page","revisions":[{}]}}]}}}}"#, revs.join(","))
}

const API: &str = "https://wiki.test/w/api.php";

#[test]
fn seven_revisions_truncate_to_five_ascending() {
    let (f, _) = fetcher(|u, _| ok(history(u, 7)), None);
    let v = fetch_wiki_history(&f, API, "Page", Source::Wikipedia).unwrap();
    assert_eq!(v.len(), 5);
    assert!(v.windows(2).all(|w| w[0].timestamp < w[1].timestamp));
    assert_eq!(v[0].revision_id, 3);
    let chain = build_chain(v).unwrap();
    assert_eq!(chain.revisions.len(), 4);
    assert_eq!(chain.versions[0].text, "Version 3 of the page.");
    assert!(validate_chain(&chain).is_empty());
}

#[test]
fn missing_page_and_single_revision() {
    let (f, _) = fetcher(|_, _| ok(r#"{"query":{"pages":[{"title":"Nope","missing":true}]}}"#.into()), None);
    assert!(matches!(fetch_wiki_history(&f, API, "Nope", Source::Wikipedia), Err(IngestError::PageNotFound(_))));
    let (f, _) = fetcher(|u, _| ok(history(u, 1)), None);
    let v = fetch_wiki_history(&f, API, "Page", Source::Wikinews).unwrap();
    assert_eq!(v.len(), 1);
    assert_eq!(build_chain(v).unwrap().revisions.len(), 0);
}

#[test]
fn transient_failures_are_retried() {
    let (f, calls) = fetcher(|u, n| if n < 2 { status(503) } else { ok(history(u, 2)) }, None);
    assert_eq!(fetch_wiki_history(&f, API, "Page", Source::Wikipedia).unwrap().len(), 2);
    assert_eq!(calls.load(Ordering::SeqCst), 3);

    let (f, calls) = fetcher(|_, _| Err("connection reset".into()), None);
    assert!(matches!(fetch_wiki_history(&f, API, "Page", Source::Wikipedia), Err(IngestError::Network { .. })));
    assert_eq!(calls.load(Ordering::SeqCst), 4);

    let (f, _) = fetcher(|_, _| status(429), None);
    assert!(matches!(fetch_wiki_history(&f, API, "Page", Source::Wikipedia), Err(IngestError::RateLimited { .. })));
}

#[test]
fn cache_makes_reruns_offline() {
    let dir = tempfile::tempdir().unwrap();
    let (f, calls) = fetcher(|u, _| ok(history(u, 3)), Some(Cache::new(dir.path()).unwrap()));
    let a = fetch_wiki_history(&f, API, "Page", Source::Wikipedia).unwrap();
    assert_eq!(calls.load(Ordering::SeqCst), 1);
    let (offline, calls) = fetcher(|_, _| Err("offline".into()), Some(Cache::new(dir.path()).unwrap()));
    assert_eq!(fetch_wiki_history(&offline, API, "Page", Source::Wikipedia).unwrap(), a);
    assert_eq!(calls.load(Ordering::SeqCst), 0);
}

fn atom(id: &str, day: u32, summary: &str) -> String {
    format!(
        r#"<?xml version="1.0"?><feed xmlns="http://www.w3.org/2005/Atom"><entry><id>http://arxiv.org/abs/{id}</id><updated>2021-03-{day:02}T00:00:00Z</updated><title>T</title><summary>{summary}</summary></entry></feed>"#
    )
}

const ARXIV: &str = "http://export.test/api/query";

#[test]
fn arxiv_versions_ascending() {
    let (f, _) = fetcher(
        |u, _| {
            let id = u.split("id_list=").nth(1).unwrap();
            match id.split_once('v') {
                None => ok(atom("2103.14972v4", 20, "latest")),
                Some((_, v)) => {
                    let v: u32 = v.parse().unwrap();
                    ok(atom(&format!("2103.14972v{v}"), v, &format!("Abstract version {v}.")))
                }
            }
        },
        None,
    );
    let v = fetch_arxiv_versions(&f, ARXIV, "2103.14972").unwrap();
    assert_eq!(v.len(), 4);
    assert_eq!(v.iter().map(|r| r.revision_id).collect::<Vec<_>>(), vec![1, 2, 3, 4]);
    assert_eq!(v[2].raw_payload, "Abstract version 3.");
    assert!(matches!(fetch_arxiv_versions(&f, ARXIV, "abc"), Err(IngestError::MalformedId(_))));
}

#[test]
fn arxiv_unknown_paper() {
    let (f, _) = fetcher(|_, _| ok(r#"<feed xmlns="http://www.w3.org/2005/Atom"></feed>"#.into()), None);
    assert!(matches!(fetch_arxiv_versions(&f, ARXIV, "2101.00001"), Err(IngestError::PaperNotFound(_))));
}

#[test]
fn concurrent_fetches_keep_order() {
    let (f, calls) = fetcher(|u, _| ok(history(u, 3)), None);
    let ids: Vec<String> = (0..20).map(|i| format!("Page {i}")).collect();
    let out = fetch_many(&f, Source::Wikipedia, API, &ids);
    assert_eq!(out.iter().map(|(id, _)| id.clone()).collect::<Vec<_>>(), ids);
    assert!(out.iter().all(|(_, r)| r.as_ref().unwrap().len() == 3));
    assert_eq!(calls.load(Ordering::SeqCst), 20);
}

fn raw(id: &str, n: u32, text: &str) -> RawVersion {
    RawVersion {
        source: Source::LocalFile,
        identifier: id.into(),
        timestamp: DateTime::from_timestamp(i64::from(n) * 100, 0).unwrap(),
        revision_id: u64::from(n),
        raw_payload: text.into(),
    }
}

#[test]
fn chain_staging() {
    let three = build_chain(vec![raw("d", 3, "C."), raw("d", 1, "A."), raw("d", 2, "B.")]).unwrap();
    assert_eq!(three.revisions.iter().map(|r| r.depth).collect::<Vec<_>>(), vec![1, 2]);
    assert_eq!(three.revisions[0].source_text, "A.");
    let dup = build_chain(vec![raw("d", 1, "A."), raw("d", 2, "A."), raw("d", 3, "B.")]).unwrap();
    assert_eq!(dup.revisions.len(), 1);
    assert_eq!(build_chain(vec![raw("d", 1, "A.")]).unwrap().revisions.len(), 0);
    assert!(matches!(build_chain(vec![]), Err(IngestError::EmptyHistory)));
    assert!(matches!(build_chain(vec![raw("a", 1, "A."), raw("b", 2, "B.")]), Err(IngestError::MixedIdentifiers(..))));
    for c in [three, dup] {
        assert!(validate_chain(&c).is_empty());
        assert!(c.revisions.iter().all(|r| r.source_text != r.target_text));
    }
}

#[test]
fn local_directory() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [("essay.v1.txt", "First."), ("essay.v2.txt", "Second."), ("essay.v10.txt", "Tenth."), ("notes.md", "x")] {
        std::fs::write(dir.path().join(name), text).unwrap();
    }
    let docs = load_local_dir(dir.path()).unwrap();
    assert_eq!(docs.len(), 1);
    let chain = build_chain(docs["essay"].clone()).unwrap();
    assert_eq!(chain.versions.iter().map(|v| v.text.as_str()).collect::<Vec<_>>(), vec!["First.", "Second.", "Tenth."]);
}

proptest! {
    #[test]
    fn wikitext_is_idempotent(s in r"([a-z ]{0,6}|\[\[|\]\]|\{\{|\}\}|\||<ref>|</ref>|<ref/>|''|\n|==|\{\||\|\}|\*|https://x\.y|<!--|-->|\[|\]|:|Category|<b>|</b>|\(|\)){0,40}") {
        let once = parse_wikitext(&s);
        prop_assert_eq!(parse_wikitext(&once), once.clone());
        let (_, dropped) = parse_wikitext_counted(&once);
        prop_assert_eq!(dropped, 0);
    }
}
