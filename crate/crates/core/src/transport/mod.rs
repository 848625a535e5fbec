//! Abstract HTTP transport used by the crawler, harvester and prober.
//!
//! Two implementations ship: [`HttpTransport`] over the real network and
//! [`SimulatedWeb`], an in-process site graph for deterministic tests.

mod sim;

use std::time::Duration;

pub use sim::{FetchRecord, SimResponse, SimulatedWeb, SiteManifestError};

/// Hard cap on response bodies read from the network.
pub const MAX_BODY_BYTES: u64 = 32 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub headers: Vec<(String, String)>,
    pub body: Vec<u8>,
}

impl HttpResponse {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }

    pub fn content_type(&self) -> &str {
        self.header("content-type").unwrap_or("")
    }

    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransportError {
    #[error("request timed out")]
    Timeout,
    #[error("connection failed: {0}")]
    Connect(String),
    #[error("invalid request: {0}")]
    InvalidUrl(String),
    #[error("transport error: {0}")]
    Other(String),
}

impl TransportError {
    /// Transient failures are retried once by the crawler.
    pub fn is_transient(&self) -> bool {
        matches!(self, TransportError::Timeout | TransportError::Connect(_))
    }
}

pub trait Transport: Send + Sync {
    fn request(&self, url: &str, timeout: Duration) -> Result<HttpResponse, TransportError>;
}

impl<T: Transport + ?Sized> Transport for std::sync::Arc<T> {
    fn request(&self, url: &str, timeout: Duration) -> Result<HttpResponse, TransportError> {
        (**self).request(url, timeout)
    }
}

impl<T: Transport + ?Sized> Transport for &T {
    fn request(&self, url: &str, timeout: Duration) -> Result<HttpResponse, TransportError> {
        (**self).request(url, timeout)
    }
}

/// Blocking network client.
pub struct HttpTransport {
    user_agent: String,
}

impl HttpTransport {
    pub fn new(user_agent: impl Into<String>) -> Self {
        HttpTransport {
            user_agent: user_agent.into(),
        }
    }
}

impl Default for HttpTransport {
    fn default() -> Self {
        HttpTransport::new(concat!("atmohub/", env!("CARGO_PKG_VERSION")))
    }
}

impl Transport for HttpTransport {
    fn request(&self, url: &str, timeout: Duration) -> Result<HttpResponse, TransportError> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .user_agent(self.user_agent.as_str())
            .max_redirects(5)
            .build()
            .into();
        let mut response = agent.get(url).call().map_err(map_ureq_error)?;
        let status = response.status().as_u16();
        let headers = response
            .headers()
            .iter()
            .filter_map(|(k, v)| Some((k.as_str().to_string(), v.to_str().ok()?.to_string())))
            .collect();
        let body = response
            .body_mut()
            .with_config()
            .limit(MAX_BODY_BYTES)
            .read_to_vec()
            .map_err(map_ureq_error)?;
        Ok(HttpResponse { status, headers, body })
    }
}

fn map_ureq_error(err: ureq::Error) -> TransportError {
    match err {
        ureq::Error::Timeout(_) => TransportError::Timeout,
        ureq::Error::Io(e) if e.kind() == std::io::ErrorKind::TimedOut => TransportError::Timeout,
        ureq::Error::Io(e) => TransportError::Connect(e.to_string()),
        ureq::Error::HostNotFound | ureq::Error::ConnectionFailed => TransportError::Connect(err.to_string()),
        ureq::Error::BadUri(msg) => TransportError::InvalidUrl(msg),
        other => TransportError::Other(other.to_string()),
    }
}
