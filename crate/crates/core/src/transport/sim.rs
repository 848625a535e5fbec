use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::Deserialize;

use super::{HttpResponse, Transport, TransportError};
use crate::clock::Clock;
use crate::crawl::normalize_url;

/// Canned answer served by a [`SimulatedWeb`] route.
#[derive(Debug, Clone)]
pub struct SimResponse {
    pub status: u16,
    pub content_type: String,
    pub body: Arc<[u8]>,
    pub latency_ms: u64,
    /// Forces a timeout regardless of latency.
    pub timeout: bool,
}

impl SimResponse {
    pub fn html(body: impl Into<String>) -> Self {
        SimResponse::with_type("text/html; charset=utf-8", body.into().into_bytes())
    }

    pub fn xml(body: impl Into<Vec<u8>>) -> Self {
        SimResponse::with_type("text/xml", body.into())
    }

    pub fn text(body: impl Into<String>) -> Self {
        SimResponse::with_type("text/plain", body.into().into_bytes())
    }

    pub fn with_type(content_type: &str, body: Vec<u8>) -> Self {
        SimResponse {
            status: 200,
            content_type: content_type.to_string(),
            body: body.into(),
            latency_ms: 0,
            timeout: false,
        }
    }

    pub fn status(code: u16) -> Self {
        SimResponse {
            status: code,
            ..SimResponse::text(String::new())
        }
    }

    pub fn timed_out() -> Self {
        SimResponse {
            timeout: true,
            ..SimResponse::status(200)
        }
    }

    pub fn latency(mut self, ms: u64) -> Self {
        self.latency_ms = ms;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchRecord {
    pub url: String,
    pub at_ms: u64,
}

/// In-process web: a map from canonical URL to canned response.
///
/// Exact routes match the full canonical URL. Endpoint routes match any
/// query string on a canonical base URL, which is how OGC endpoints behave.
/// Unknown URLs answer 404. With a clock attached, each answer advances
/// virtual time by its latency and every request is logged with its start
/// time.
#[derive(Default)]
pub struct SimulatedWeb {
    exact: HashMap<String, SimResponse>,
    endpoints: HashMap<String, SimResponse>,
    clock: Option<Arc<dyn Clock>>,
    log: Mutex<Vec<FetchRecord>>,
}

impl SimulatedWeb {
    pub fn new() -> Self {
        SimulatedWeb::default()
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = Some(clock);
        self
    }

    pub fn set_clock(&mut self, clock: Arc<dyn Clock>) {
        self.clock = Some(clock);
    }

    pub fn route(&mut self, url: &str, response: SimResponse) -> &mut Self {
        self.exact.insert(canonical(url), response);
        self
    }

    pub fn page(&mut self, url: &str, html: impl Into<String>) -> &mut Self {
        self.route(url, SimResponse::html(html))
    }

    pub fn endpoint(&mut self, base: &str, response: SimResponse) -> &mut Self {
        self.endpoints.insert(strip_query(&canonical(base)), response);
        self
    }

    pub fn fetch_log(&self) -> Vec<FetchRecord> {
        self.log.lock().expect("fetch log poisoned").clone()
    }

    pub fn clear_log(&self) {
        self.log.lock().expect("fetch log poisoned").clear();
    }

    fn lookup(&self, url: &str) -> Option<&SimResponse> {
        let key = canonical(url);
        self.exact.get(&key).or_else(|| self.endpoints.get(&strip_query(&key)))
    }

    /// Loads a site graph from a TOML manifest. Relative document paths
    /// resolve against the manifest's directory.
    pub fn from_manifest(path: &Path) -> Result<Self, SiteManifestError> {
        let text = std::fs::read_to_string(path).map_err(|e| SiteManifestError::Io(path.to_path_buf(), e))?;
        let manifest: SiteManifest = toml::from_str(&text).map_err(|e| SiteManifestError::Parse(e.to_string()))?;
        let root = path.parent().unwrap_or_else(|| Path::new("."));
        let read = |rel: &str| -> Result<Vec<u8>, SiteManifestError> {
            let p = root.join(rel);
            std::fs::read(&p).map_err(|e| SiteManifestError::Io(p, e))
        };

        let mut web = SimulatedWeb::new();
        for page in &manifest.page {
            let mut response = match (&page.body, &page.document) {
                (Some(body), _) => SimResponse::html(body.clone()),
                (None, Some(doc)) => SimResponse::html(String::from_utf8_lossy(&read(doc)?).into_owned()),
                (None, None) => SimResponse::html(render_page(&page.title, &page.links)),
            };
            if let Some(ct) = &page.content_type {
                response.content_type = ct.clone();
            }
            response.status = page.status.unwrap_or(200);
            response.latency_ms = page.latency_ms.unwrap_or(manifest.default_latency_ms);
            web.route(&page.url, response);
        }
        for ep in &manifest.endpoint {
            let body = match (&ep.document, &ep.body) {
                (Some(doc), _) => read(doc)?,
                (None, Some(body)) => body.clone().into_bytes(),
                (None, None) => Vec::new(),
            };
            let mut response = SimResponse::with_type(ep.content_type.as_deref().unwrap_or("text/xml"), body);
            response.status = ep.status.unwrap_or(200);
            response.latency_ms = ep.latency_ms.unwrap_or(manifest.default_latency_ms);
            if ep.exact {
                web.route(&ep.url, response);
            } else {
                web.endpoint(&ep.url, response);
            }
        }
        Ok(web)
    }
}

impl Transport for SimulatedWeb {
    fn request(&self, url: &str, timeout: Duration) -> Result<HttpResponse, TransportError> {
        let started = self.clock.as_ref().map(|c| c.now_ms()).unwrap_or(0);
        self.log.lock().expect("fetch log poisoned").push(FetchRecord {
            url: canonical(url),
            at_ms: started,
        });
        let timeout_ms = timeout.as_millis() as u64;
        let Some(response) = self.lookup(url) else {
            return Ok(HttpResponse {
                status: 404,
                headers: vec![("content-type".into(), "text/plain".into())],
                body: b"not found".to_vec(),
            });
        };
        if response.timeout || response.latency_ms > timeout_ms {
            if let Some(clock) = &self.clock {
                clock.sleep_ms(timeout_ms);
            }
            return Err(TransportError::Timeout);
        }
        if let Some(clock) = &self.clock {
            clock.sleep_ms(response.latency_ms);
        }
        Ok(HttpResponse {
            status: response.status,
            headers: vec![("content-type".into(), response.content_type.clone())],
            body: response.body.to_vec(),
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SiteManifestError {
    #[error("cannot read {0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("invalid site manifest: {0}")]
    Parse(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SiteManifest {
    #[serde(default)]
    default_latency_ms: u64,
    #[serde(default)]
    page: Vec<PageSpec>,
    #[serde(default)]
    endpoint: Vec<EndpointSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PageSpec {
    url: String,
    #[serde(default)]
    title: String,
    #[serde(default)]
    links: Vec<String>,
    body: Option<String>,
    document: Option<String>,
    content_type: Option<String>,
    status: Option<u16>,
    latency_ms: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EndpointSpec {
    url: String,
    document: Option<String>,
    body: Option<String>,
    content_type: Option<String>,
    status: Option<u16>,
    latency_ms: Option<u64>,
    /// Match only the exact URL instead of any query on its path.
    #[serde(default)]
    exact: bool,
}

fn render_page(title: &str, links: &[String]) -> String {
    let mut html = format!(
        "<!DOCTYPE html>\n<html><head><title>{t}</title></head><body><h1>{t}</h1><ul>\n",
        t = title
    );
    for link in links {
        html.push_str(&format!("<li><a href=\"{link}\">{link}</a></li>\n"));
    }
    html.push_str("</ul></body></html>\n");
    html
}

fn canonical(url: &str) -> String {
    normalize_url(url)
        .map(|u| u.to_string())
        .unwrap_or_else(|_| url.to_string())
}

fn strip_query(url: &str) -> String {
    url.split('?').next().unwrap_or(url).to_string()
}
