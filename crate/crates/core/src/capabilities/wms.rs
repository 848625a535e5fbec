use roxmltree::Node;

use super::ows::contact_string;
use super::xml::{child, child_text, children, list, parse_f64, path, path_text, texts};
use super::{bbox, parse_time_extent, push_unique, LayerDraft, ServiceMeta};
use crate::model::{BoundingBox, TimeExtent};

pub(crate) fn service_metadata(root: Node<'_, '_>) -> ServiceMeta {
    let mut meta = ServiceMeta::default();
    let Some(service) = child(root, "Service") else {
        return meta;
    };
    meta.title = child_text(service, "Title");
    meta.abstract_text = child_text(service, "Abstract");
    meta.keywords = list(service, "KeywordList", "Keyword");
    if let Some(info) = child(service, "ContactInformation") {
        meta.provider_name = path_text(info, &["ContactPersonPrimary", "ContactOrganization"]);
        let person = path_text(info, &["ContactPersonPrimary", "ContactPerson"]);
        let email = child_text(info, "ContactElectronicMailAddress");
        meta.contact = contact_string(&person, &email);
    }
    meta
}

/// Properties a child layer inherits from its ancestors.
#[derive(Clone, Default)]
struct Inherited {
    bbox: Option<BoundingBox>,
    srs: Vec<String>,
    time: Option<TimeExtent>,
}

pub(crate) fn layers(root: Node<'_, '_>) -> Vec<LayerDraft> {
    let Some(capability) = child(root, "Capability") else {
        return Vec::new();
    };
    let formats = path(capability, &["Request", "GetMap"])
        .map(|n| texts(n, "Format"))
        .unwrap_or_default();
    let mut out = Vec::new();
    for layer in children(capability, "Layer") {
        walk(layer, &Inherited::default(), &formats, &mut out);
    }
    out
}

fn walk(node: Node<'_, '_>, parent: &Inherited, formats: &[String], out: &mut Vec<LayerDraft>) {
    let mut here = parent.clone();
    if let Some(b) = own_bbox(node) {
        here.bbox = Some(b);
    }
    let mut own_srs = Vec::new();
    for tag in ["CRS", "SRS"] {
        for value in texts(node, tag) {
            push_unique(&mut own_srs, value.split_whitespace().map(str::to_string));
        }
    }
    push_unique(&mut here.srs, own_srs);
    if let Some(t) = own_time(node) {
        here.time = Some(t);
    }

    let name = child_text(node, "Name");
    if !name.is_empty() {
        out.push(LayerDraft {
            name,
            title: child_text(node, "Title"),
            abstract_text: child_text(node, "Abstract"),
            keywords: list(node, "KeywordList", "Keyword"),
            bounding_box: here.bbox,
            supported_srs: here.srs.clone(),
            formats: formats.to_vec(),
            time_extent: here.time.clone(),
        });
    }
    for sub in children(node, "Layer") {
        walk(sub, &here, formats, out);
    }
}

fn own_bbox(node: Node<'_, '_>) -> Option<BoundingBox> {
    if let Some(g) = child(node, "EX_GeographicBoundingBox") {
        let v = |tag| parse_f64(&child_text(g, tag));
        return bbox(
            v("westBoundLongitude"),
            v("southBoundLatitude"),
            v("eastBoundLongitude"),
            v("northBoundLatitude"),
        );
    }
    let g = child(node, "LatLonBoundingBox")?;
    let a = |name| g.attribute(name).and_then(parse_f64);
    bbox(a("minx"), a("miny"), a("maxx"), a("maxy"))
}

fn own_time(node: Node<'_, '_>) -> Option<TimeExtent> {
    ["Dimension", "Extent"].iter().find_map(|tag| {
        children(node, tag)
            .filter(|n| n.attribute("name").is_some_and(|v| v.eq_ignore_ascii_case("time")))
            .find_map(|n| parse_time_extent(&super::xml::text(n)))
    })
}
