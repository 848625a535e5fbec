use std::path::Path;

use serde::Deserialize;
use url::Url;

use super::url::{form_query, normalize_url};
use crate::model::ServiceType;

const DEFAULT_PATTERNS: &str = include_str!("../../data/probe_patterns.toml");

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbePattern {
    pub segment: String,
    pub services: Vec<ServiceType>,
}

/// Endpoint heuristics used by [`derive_ows_probes`], loaded from TOML.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbePatterns {
    #[serde(rename = "pattern", default)]
    pub patterns: Vec<ProbePattern>,
}

#[derive(Debug, thiserror::Error)]
pub enum ProbeConfigError {
    #[error("cannot read probe patterns: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid probe patterns: {0}")]
    Parse(String),
}

impl ProbePatterns {
    pub fn from_toml(text: &str) -> Result<Self, ProbeConfigError> {
        toml::from_str(text).map_err(|e| ProbeConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ProbeConfigError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Service types implied by the URL's path segments, in enum order.
    pub fn services_for(&self, url: &Url) -> Vec<ServiceType> {
        let segments: Vec<String> = url
            .path_segments()
            .map(|s| s.map(|seg| seg.to_ascii_lowercase()).collect())
            .unwrap_or_default();
        let mut found: Vec<ServiceType> = self
            .patterns
            .iter()
            .filter(|p| segments.iter().any(|s| s.eq_ignore_ascii_case(&p.segment)))
            .flat_map(|p| p.services.iter().copied())
            .collect();
        found.sort();
        found.dedup();
        found
    }
}

impl Default for ProbePatterns {
    fn default() -> Self {
        ProbePatterns::from_toml(DEFAULT_PATTERNS).expect("bundled probe patterns are valid")
    }
}

/// GetCapabilities probe URLs worth trying for `url`.
///
/// A URL that already names a service gets `request=GetCapabilities`
/// ensured. Otherwise path segments are matched against `patterns` and one
/// probe is emitted per implied service type.
pub fn derive_ows_probes(url: &Url, patterns: &ProbePatterns) -> Vec<Url> {
    if !matches!(url.scheme(), "http" | "https") {
        return Vec::new();
    }
    let pairs: Vec<(String, String)> = url
        .query_pairs()
        .map(|(k, v)| (k.to_ascii_lowercase(), v.into_owned()))
        .collect();
    if pairs.iter().any(|(k, _)| k == "service") {
        let mut pairs: Vec<_> = pairs.into_iter().filter(|(k, _)| k != "request").collect();
        pairs.push(("request".into(), "GetCapabilities".into()));
        return with_query(url, &pairs).into_iter().collect();
    }
    patterns
        .services_for(url)
        .into_iter()
        .filter_map(|svc| {
            let mut pairs = pairs.clone();
            pairs.push(("service".into(), svc.as_str().into()));
            pairs.push(("request".into(), "GetCapabilities".into()));
            with_query(url, &pairs)
        })
        .collect()
}

fn with_query(url: &Url, pairs: &[(String, String)]) -> Option<Url> {
    let mut u = url.clone();
    u.set_query(Some(&form_query(pairs)));
    normalize_url(u.as_str()).ok()
}

/// Identity of an OGC endpoint: the URL without the protocol parameters
/// that select the operation. Probes of one endpoint share this key.
pub fn endpoint_key(url: &Url) -> String {
    const PROTOCOL_KEYS: [&str; 4] = ["request", "service", "version", "acceptversions"];
    let rest: Vec<(String, String)> = url
        .query_pairs()
        .filter(|(k, _)| !PROTOCOL_KEYS.contains(&k.to_ascii_lowercase().as_str()))
        .map(|(k, v)| (k.into_owned(), v.into_owned()))
        .collect();
    let mut u = url.clone();
    if rest.is_empty() {
        u.set_query(None);
    } else {
        u.set_query(Some(&form_query(&rest)));
    }
    u.to_string()
}
