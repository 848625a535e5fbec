use crate::catalogue::CatalogEntry;
use crate::crawl::url::form_query;
use crate::model::{BoundingBox, ServiceType};

pub const THUMBNAIL_WIDTH: u32 = 256;
pub const THUMBNAIL_HEIGHT: u32 = 128;
/// Feature limit for WFS previews.
pub const PREVIEW_FEATURES: u32 = 10;

fn with_query(base: &str, pairs: Vec<(&str, String)>) -> String {
    let pairs: Vec<(String, String)> = pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    let query = form_query(&pairs);
    let sep = if base.contains('?') { '&' } else { '?' };
    format!("{base}{sep}{query}")
}

/// A preview request for WMS (GetMap) and WFS (GetFeature) layers; `None`
/// for every other service type.
pub fn thumbnail_url(entry: &CatalogEntry) -> Option<String> {
    let base = entry.layer.url.as_str();
    let version = entry.service.version.clone();
    let name = entry.layer.name.clone();
    match entry.service.service_type {
        ServiceType::Wms => {
            let b = entry.layer.bounding_box.unwrap_or(BoundingBox::WORLD);
            // WMS 1.3.0 uses latitude-first axis order for EPSG:4326.
            let (crs_key, bbox) = if version == "1.3.0" {
                (
                    "CRS",
                    format!("{},{},{},{}", b.min_lat, b.min_lon, b.max_lat, b.max_lon),
                )
            } else {
                (
                    "SRS",
                    format!("{},{},{},{}", b.min_lon, b.min_lat, b.max_lon, b.max_lat),
                )
            };
            Some(with_query(
                base,
                vec![
                    ("service", "WMS".into()),
                    ("version", version),
                    ("request", "GetMap".into()),
                    ("layers", name),
                    ("styles", String::new()),
                    (crs_key, "EPSG:4326".into()),
                    ("bbox", bbox),
                    ("width", THUMBNAIL_WIDTH.to_string()),
                    ("height", THUMBNAIL_HEIGHT.to_string()),
                    ("format", "image/png".into()),
                ],
            ))
        }
        ServiceType::Wfs => {
            let (type_key, count_key) = if version.starts_with('2') {
                ("typeNames", "count")
            } else {
                ("typeName", "maxFeatures")
            };
            Some(with_query(
                base,
                vec![
                    ("service", "WFS".into()),
                    ("version", version),
                    ("request", "GetFeature".into()),
                    (type_key, name),
                    (count_key, PREVIEW_FEATURES.to_string()),
                ],
            ))
        }
        _ => None,
    }
}
