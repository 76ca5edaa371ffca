//! HTTP transport, per-endpoint rate limiting and retries.

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::cache::Cache;
use crate::{FetchPolicy, IngestError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
    /// Seconds from a `Retry-After` header.
    pub retry_after: Option<u64>,
}

pub trait HttpTransport: Send + Sync {
    /// Transport-level failures are `Err`; HTTP error statuses are `Ok`.
    fn get(&self, url: &str) -> Result<HttpResponse, String>;
}

pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new(timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(timeout))
            .user_agent(concat!("revkit/", env!("CARGO_PKG_VERSION"), " (research corpus tool)"))
            .build()
            .into();
        UreqTransport { agent }
    }
}

impl Default for UreqTransport {
    fn default() -> Self {
        UreqTransport::new(Duration::from_secs(30))
    }
}

impl HttpTransport for UreqTransport {
    fn get(&self, url: &str) -> Result<HttpResponse, String> {
        let mut resp = self.agent.get(url).call().map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let retry_after = resp
            .headers()
            .get("retry-after")
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse().ok());
        let body = resp.body_mut().read_to_string().map_err(|e| e.to_string())?;
        Ok(HttpResponse { status, body, retry_after })
    }
}

/// Token bucket per endpoint host, shared across threads.
#[derive(Debug)]
pub struct RateLimiter {
    rate: f64,
    burst: f64,
    buckets: Mutex<HashMap<String, (f64, Instant)>>,
}

impl RateLimiter {
    pub fn new(rate: f64) -> Self {
        RateLimiter {
            rate,
            burst: 1.0,
            buckets: Mutex::new(HashMap::new()),
        }
    }

    /// Time to wait before a request to `key` may go out; reserves the token.
    pub fn reserve(&self, key: &str) -> Duration {
        let now = Instant::now();
        let mut b = self.buckets.lock().expect("rate limiter poisoned");
        let (tokens, last) = b.entry(key.to_string()).or_insert((self.burst, now));
        let available = (*tokens + now.saturating_duration_since(*last).as_secs_f64() * self.rate).min(self.burst);
        // the bucket may go negative; later callers then queue behind this one
        *tokens = available - 1.0;
        *last = now;
        if *tokens >= 0.0 {
            Duration::ZERO
        } else {
            Duration::from_secs_f64(-*tokens / self.rate)
        }
    }

    pub fn acquire(&self, key: &str) {
        let wait = self.reserve(key);
        if !wait.is_zero() {
            std::thread::sleep(wait);
        }
    }
}

fn host_of(url: &str) -> String {
    url::Url::parse(url)
        .ok()
        .and_then(|u| u.host_str().map(str::to_string))
        .unwrap_or_else(|| url.to_string())
}

/// Issues GETs through the cache, the rate limiter and the retry policy.
pub struct Fetcher {
    pub transport: Box<dyn HttpTransport>,
    pub limiter: RateLimiter,
    pub cache: Option<Cache>,
    pub policy: FetchPolicy,
    /// Replaced in tests to avoid real waiting.
    pub sleep: fn(Duration),
}

pub(crate) enum Fetched {
    Body(String),
    NotFound,
}

impl Fetcher {
    pub fn new(transport: Box<dyn HttpTransport>, policy: FetchPolicy, cache: Option<Cache>) -> Result<Self, IngestError> {
        policy.validate()?;
        Ok(Fetcher {
            transport,
            limiter: RateLimiter::new(policy.request_rate_limit),
            cache,
            policy,
            sleep: std::thread::sleep,
        })
    }

    /// Body of a successful GET. 404 maps to `NotFound`; 429 and 5xx and
    /// transport errors are retried with exponential backoff.
    pub(crate) fn get(&self, url: &str, cache_key: &[&str]) -> Result<Fetched, IngestError> {
        let key = Cache::key(cache_key);
        if let Some(body) = self.cache.as_ref().and_then(|c| c.get(&key)) {
            log::debug!("cache hit {url}");
            return Ok(Fetched::Body(body));
        }
        let host = host_of(url);
        let mut last_err = String::new();
        let mut limited = false;
        for attempt in 0..self.policy.max_attempts {
            if attempt > 0 {
                (self.sleep)(self.policy.backoff_base * 2u32.saturating_pow(attempt - 1));
            }
            let wait = self.limiter.reserve(&host);
            if !wait.is_zero() {
                (self.sleep)(wait);
            }
            match self.transport.get(url) {
                Ok(r) if (200..300).contains(&r.status) => {
                    if let Some(c) = &self.cache {
                        c.put(&key, &r.body)?;
                    }
                    return Ok(Fetched::Body(r.body));
                }
                Ok(r) if r.status == 404 => return Ok(Fetched::NotFound),
                Ok(r) if r.status == 429 => {
                    limited = true;
                    if let Some(s) = r.retry_after {
                        (self.sleep)(Duration::from_secs(s));
                    }
                }
                Ok(r) if r.status >= 500 => {
                    limited = false;
                    last_err = format!("HTTP {}", r.status);
                }
                Ok(r) => {
                    return Err(IngestError::Network {
                        url: url.into(),
                        message: format!("HTTP {}", r.status),
                    })
                }
                Err(e) => {
                    limited = false;
                    last_err = e;
                }
            }
            log::warn!("attempt {} for {url} failed", attempt + 1);
        }
        if limited {
            Err(IngestError::RateLimited {
                url: url.into(),
                attempts: self.policy.max_attempts,
            })
        } else {
            Err(IngestError::Network {
                url: url.into(),
                message: last_err,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bucket_spaces_requests() {
        let l = RateLimiter::new(2.0);
        assert_eq!(l.reserve("h"), Duration::ZERO);
        let w = l.reserve("h");
        assert!(w > Duration::from_millis(400) && w <= Duration::from_millis(500), "{w:?}");
        assert!(l.reserve("h") > w);
        assert_eq!(l.reserve("other"), Duration::ZERO);
    }
}
