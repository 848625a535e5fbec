use roxmltree::Node;

use super::xml::{child, child_text, children, list, pair, texts};
use super::{bbox, push_unique, LayerDraft};
use crate::model::BoundingBox;

pub(crate) fn feature_types(root: Node<'_, '_>) -> Vec<LayerDraft> {
    let global_formats = get_feature_formats(root);
    let Some(type_list) = child(root, "FeatureTypeList") else {
        return Vec::new();
    };
    children(type_list, "FeatureType")
        .map(|ft| {
            let mut srs = Vec::new();
            for tag in ["DefaultSRS", "DefaultCRS", "OtherSRS", "OtherCRS"] {
                push_unique(&mut srs, texts(ft, tag));
            }
            let own_formats = list(ft, "OutputFormats", "Format");
            LayerDraft {
                name: child_text(ft, "Name"),
                title: child_text(ft, "Title"),
                abstract_text: child_text(ft, "Abstract"),
                keywords: list(ft, "Keywords", "Keyword"),
                bounding_box: wgs84_bbox(ft),
                supported_srs: srs,
                formats: if own_formats.is_empty() {
                    global_formats.clone()
                } else {
                    own_formats
                },
                time_extent: None,
            }
        })
        .collect()
}

/// `ows:WGS84BoundingBox` with lon/lat corners.
pub(crate) fn wgs84_bbox(node: Node<'_, '_>) -> Option<BoundingBox> {
    let b = child(node, "WGS84BoundingBox")?;
    let lower = pair(&child_text(b, "LowerCorner"));
    let upper = pair(&child_text(b, "UpperCorner"));
    bbox(
        lower.map(|p| p.0),
        lower.map(|p| p.1),
        upper.map(|p| p.0),
        upper.map(|p| p.1),
    )
}

/// Allowed values of the GetFeature `outputFormat` parameter.
fn get_feature_formats(root: Node<'_, '_>) -> Vec<String> {
    let Some(ops) = child(root, "OperationsMetadata") else {
        return Vec::new();
    };
    let Some(op) = children(ops, "Operation").find(|o| o.attribute("name") == Some("GetFeature")) else {
        return Vec::new();
    };
    let Some(param) = children(op, "Parameter").find(|p| p.attribute("name") == Some("outputFormat")) else {
        return Vec::new();
    };
    let mut out = texts(param, "Value");
    if let Some(allowed) = child(param, "AllowedValues") {
        push_unique(&mut out, texts(allowed, "Value"));
    }
    out
}
