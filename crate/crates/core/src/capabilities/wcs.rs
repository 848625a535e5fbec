use roxmltree::Node;

use super::ows::contact_string;
use super::wfs::wgs84_bbox;
use super::xml::{child, child_text, children, list, pair, path_text, texts};
use super::{bbox, LayerDraft, ServiceMeta};
use crate::model::BoundingBox;

/// WCS 1.0.0 predates OWS Common and has its own lower-case service section.
pub(crate) fn service_metadata_v1(root: Node<'_, '_>) -> ServiceMeta {
    let mut meta = ServiceMeta::default();
    let Some(service) = child(root, "Service") else {
        return meta;
    };
    meta.title = child_text(service, "label");
    if meta.title.is_empty() {
        meta.title = child_text(service, "name");
    }
    meta.abstract_text = child_text(service, "description");
    meta.keywords = list(service, "keywords", "keyword");
    if let Some(party) = child(service, "responsibleParty") {
        meta.provider_name = child_text(party, "organisationName");
        let person = child_text(party, "individualName");
        let email = path_text(party, &["contactInfo", "address", "electronicMailAddress"]);
        meta.contact = contact_string(&person, &email);
    }
    meta
}

pub(crate) fn coverages_v1(root: Node<'_, '_>) -> Vec<LayerDraft> {
    let Some(content) = child(root, "ContentMetadata") else {
        return Vec::new();
    };
    children(content, "CoverageOfferingBrief")
        .map(|c| LayerDraft {
            name: child_text(c, "name"),
            title: child_text(c, "label"),
            abstract_text: child_text(c, "description"),
            keywords: list(c, "keywords", "keyword"),
            bounding_box: lon_lat_envelope(c),
            supported_srs: Vec::new(),
            formats: Vec::new(),
            time_extent: None,
        })
        .collect()
}

fn lon_lat_envelope(node: Node<'_, '_>) -> Option<BoundingBox> {
    let env = child(node, "lonLatEnvelope")?;
    let positions: Vec<String> = texts(env, "pos");
    let lower = positions.first().and_then(|p| pair(p));
    let upper = positions.get(1).and_then(|p| pair(p));
    bbox(
        lower.map(|p| p.0),
        lower.map(|p| p.1),
        upper.map(|p| p.0),
        upper.map(|p| p.1),
    )
}

pub(crate) fn coverages_v2(root: Node<'_, '_>) -> Vec<LayerDraft> {
    let formats = child(root, "ServiceMetadata")
        .map(|m| texts(m, "formatSupported"))
        .unwrap_or_default();
    let Some(contents) = child(root, "Contents") else {
        return Vec::new();
    };
    children(contents, "CoverageSummary")
        .map(|c| LayerDraft {
            name: child_text(c, "CoverageId"),
            title: child_text(c, "Title"),
            abstract_text: child_text(c, "Abstract"),
            keywords: list(c, "Keywords", "Keyword"),
            bounding_box: wgs84_bbox(c),
            supported_srs: Vec::new(),
            formats: formats.clone(),
            time_extent: None,
        })
        .collect()
}
