//! GetCapabilities parsing for WMS, WFS, WCS, CSW and WPS.
//!
//! Elements are matched on local names so that documents with unusual
//! prefixes still parse. Missing optional metadata becomes empty strings or
//! lists rather than an error.

mod ows;
mod wcs;
mod wfs;
mod wms;
mod xml;

use roxmltree::{Document, Node, ParsingOptions};
use serde::{Deserialize, Serialize};
use url::Url;

use crate::model::{BoundingBox, ServiceType, TimeExtent};

/// Documents above this size are rejected unparsed.
pub const MAX_DOCUMENT_BYTES: usize = 32 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CapabilitiesError {
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("not a capabilities document (root `{0}`)")]
    NotCapabilities(String),
    #[error("unsupported {service} version `{version}`")]
    UnsupportedVersion { service: ServiceType, version: String },
}

/// Service-level metadata of a parsed capabilities document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ServiceDraft {
    pub service_type: ServiceType,
    pub version: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub keywords: Vec<String>,
    pub provider_name: String,
    pub contact: Option<String>,
    pub capabilities_url: String,
}

/// One named layer, feature type or coverage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LayerDraft {
    pub name: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub keywords: Vec<String>,
    pub bounding_box: Option<BoundingBox>,
    pub supported_srs: Vec<String>,
    pub formats: Vec<String>,
    pub time_extent: Option<TimeExtent>,
}

impl LayerDraft {
    pub fn named(name: impl Into<String>) -> Self {
        LayerDraft {
            name: name.into(),
            title: String::new(),
            abstract_text: String::new(),
            keywords: Vec::new(),
            bounding_box: None,
            supported_srs: Vec::new(),
            formats: Vec::new(),
            time_extent: None,
        }
    }
}

pub(crate) const SUPPORTED_VERSIONS: &[(ServiceType, &[&str])] = &[
    (ServiceType::Wms, &["1.1.1", "1.3.0"]),
    (ServiceType::Wfs, &["1.1.0", "2.0.0"]),
    (ServiceType::Wcs, &["1.0.0", "2.0.1"]),
    (ServiceType::Csw, &["2.0.2"]),
    (ServiceType::Wps, &["1.0.0"]),
];

pub fn is_supported(service: ServiceType, version: &str) -> bool {
    SUPPORTED_VERSIONS
        .iter()
        .any(|(s, versions)| *s == service && versions.contains(&version))
}

fn decode(xml: &[u8]) -> Result<String, CapabilitiesError> {
    if xml.len() > MAX_DOCUMENT_BYTES {
        return Err(CapabilitiesError::MalformedXml(format!(
            "document of {} bytes exceeds the {MAX_DOCUMENT_BYTES}-byte limit",
            xml.len()
        )));
    }
    Ok(String::from_utf8_lossy(xml).into_owned())
}

fn parse_document(text: &str) -> Result<Document<'_>, CapabilitiesError> {
    let options = ParsingOptions {
        allow_dtd: true,
        nodes_limit: 4_000_000,
    };
    Document::parse_with_options(text, options).map_err(|e| CapabilitiesError::MalformedXml(e.to_string()))
}

fn identify(root: Node<'_, '_>) -> Result<(ServiceType, String), CapabilitiesError> {
    let local = root.tag_name().name();
    let namespace = root.tag_name().namespace().unwrap_or("");
    let not_caps = || CapabilitiesError::NotCapabilities(local.to_string());
    if !namespace.is_empty() && !namespace.contains("opengis.net") {
        return Err(not_caps());
    }
    let service = match local {
        "WMS_Capabilities" | "WMT_MS_Capabilities" => ServiceType::Wms,
        "WFS_Capabilities" => ServiceType::Wfs,
        "WCS_Capabilities" => ServiceType::Wcs,
        "Capabilities" if namespace.contains("/cat/csw") => ServiceType::Csw,
        "Capabilities" if namespace.contains("/wcs") => ServiceType::Wcs,
        "Capabilities" if namespace.contains("/wps") => ServiceType::Wps,
        "Capabilities" if namespace.contains("/wfs") => ServiceType::Wfs,
        "Capabilities" if namespace.contains("/wms") => ServiceType::Wms,
        _ => return Err(not_caps()),
    };
    let version = root.attribute("version").unwrap_or("").trim().to_string();
    Ok((service, version))
}

/// Service family and version from the root element.
pub fn detect_service_kind(xml: &[u8]) -> Result<(ServiceType, String), CapabilitiesError> {
    let text = decode(xml)?;
    let doc = parse_document(&text)?;
    identify(doc.root_element())
}

/// Parses a capabilities document into a service draft and its layers.
pub fn parse_capabilities(xml: &[u8], source_url: &Url) -> Result<(ServiceDraft, Vec<LayerDraft>), CapabilitiesError> {
    let text = decode(xml)?;
    let doc = parse_document(&text)?;
    let root = doc.root_element();
    let (service_type, version) = identify(root)?;
    if !is_supported(service_type, &version) {
        return Err(CapabilitiesError::UnsupportedVersion {
            service: service_type,
            version,
        });
    }

    let meta = match (service_type, version.as_str()) {
        (ServiceType::Wms, _) => wms::service_metadata(root),
        (ServiceType::Wcs, "1.0.0") => wcs::service_metadata_v1(root),
        _ => ows::service_metadata(root),
    };
    let layers = match (service_type, version.as_str()) {
        (ServiceType::Wms, _) => wms::layers(root),
        (ServiceType::Wfs, _) => wfs::feature_types(root),
        (ServiceType::Wcs, "1.0.0") => wcs::coverages_v1(root),
        (ServiceType::Wcs, _) => wcs::coverages_v2(root),
        (ServiceType::Csw | ServiceType::Wps, _) => Vec::new(),
    };

    let draft = ServiceDraft {
        service_type,
        version,
        title: meta.title,
        abstract_text: meta.abstract_text,
        keywords: meta.keywords,
        provider_name: meta.provider_name,
        contact: meta.contact.filter(|c| !c.is_empty()),
        capabilities_url: source_url.to_string(),
    };
    Ok((draft, layers.into_iter().filter(|l| !l.name.is_empty()).collect()))
}

/// Service-level fields common to every dialect.
#[derive(Debug, Default)]
pub(crate) struct ServiceMeta {
    pub title: String,
    pub abstract_text: String,
    pub keywords: Vec<String>,
    pub provider_name: String,
    pub contact: Option<String>,
}

/// Parses an ISO-8601 extent expression: a single value, an interval
/// `start/end[/period]`, or a comma-separated list of either.
pub(crate) fn parse_time_extent(value: &str) -> Option<TimeExtent> {
    let items: Vec<&str> = value.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    let first = items.first()?;
    let last = items.last()?;
    let start = first.split('/').next()?.trim();
    let mut last_parts = last.split('/');
    let last_start = last_parts.next()?.trim();
    let end = last_parts.next().map(str::trim).unwrap_or(last_start);
    if start.is_empty() || end.is_empty() {
        return None;
    }
    Some(TimeExtent {
        start: start.to_string(),
        end: end.to_string(),
    })
}

pub(crate) fn bbox(
    min_lon: Option<f64>,
    min_lat: Option<f64>,
    max_lon: Option<f64>,
    max_lat: Option<f64>,
) -> Option<BoundingBox> {
    BoundingBox::new(min_lon?, min_lat?, max_lon?, max_lat?)
}

pub(crate) fn push_unique(list: &mut Vec<String>, items: impl IntoIterator<Item = String>) {
    for item in items {
        if !item.is_empty() && !list.contains(&item) {
            list.push(item);
        }
    }
}
