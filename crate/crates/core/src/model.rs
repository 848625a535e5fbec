//! Domain types shared by the parser, the catalogue and the query engine.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// OGC web service families recognised by the crawler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ServiceType {
    #[serde(rename = "WMS")]
    Wms,
    #[serde(rename = "WFS")]
    Wfs,
    #[serde(rename = "WCS")]
    Wcs,
    #[serde(rename = "CSW")]
    Csw,
    #[serde(rename = "WPS")]
    Wps,
}

impl ServiceType {
    pub const ALL: [ServiceType; 5] = [
        ServiceType::Wms,
        ServiceType::Wfs,
        ServiceType::Wcs,
        ServiceType::Csw,
        ServiceType::Wps,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ServiceType::Wms => "WMS",
            ServiceType::Wfs => "WFS",
            ServiceType::Wcs => "WCS",
            ServiceType::Csw => "CSW",
            ServiceType::Wps => "WPS",
        }
    }
}

impl fmt::Display for ServiceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ServiceType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "WMS" => Ok(ServiceType::Wms),
            "WFS" => Ok(ServiceType::Wfs),
            "WCS" => Ok(ServiceType::Wcs),
            "CSW" => Ok(ServiceType::Csw),
            "WPS" => Ok(ServiceType::Wps),
            other => Err(format!("unknown service type `{other}`")),
        }
    }
}

/// Axis-aligned lon/lat rectangle in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundingBox {
    pub min_lon: f64,
    pub min_lat: f64,
    pub max_lon: f64,
    pub max_lat: f64,
}

impl BoundingBox {
    pub const WORLD: BoundingBox = BoundingBox {
        min_lon: -180.0,
        min_lat: -90.0,
        max_lon: 180.0,
        max_lat: 90.0,
    };

    /// Builds a box, returning `None` unless min ≤ max on both axes and the
    /// latitudes lie in [-90, 90].
    pub fn new(min_lon: f64, min_lat: f64, max_lon: f64, max_lat: f64) -> Option<Self> {
        let finite = [min_lon, min_lat, max_lon, max_lat].iter().all(|v| v.is_finite());
        if !finite || min_lon > max_lon || min_lat > max_lat {
            return None;
        }
        if min_lat < -90.0 || max_lat > 90.0 {
            return None;
        }
        Some(BoundingBox {
            min_lon,
            min_lat,
            max_lon,
            max_lat,
        })
    }

    /// Closed-interval intersection: boxes that only touch intersect.
    pub fn intersects(&self, other: &BoundingBox) -> bool {
        self.min_lon <= other.max_lon
            && other.min_lon <= self.max_lon
            && self.min_lat <= other.max_lat
            && other.min_lat <= self.max_lat
    }

    pub fn union(&self, other: &BoundingBox) -> BoundingBox {
        BoundingBox {
            min_lon: self.min_lon.min(other.min_lon),
            min_lat: self.min_lat.min(other.min_lat),
            max_lon: self.max_lon.max(other.max_lon),
            max_lat: self.max_lat.max(other.max_lat),
        }
    }
}

/// Time extent as ISO-8601 text, kept verbatim from the source document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeExtent {
    pub start: String,
    pub end: String,
}

/// Parses the leading instant of an ISO-8601 value into milliseconds since
/// the epoch. Accepts full timestamps, dates, year-months and bare years.
pub fn parse_instant(text: &str) -> Option<i64> {
    use chrono::{DateTime, NaiveDate};

    let text = text.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(text) {
        return Some(dt.timestamp_millis());
    }
    if let Ok(dt) = chrono::NaiveDateTime::parse_from_str(text, "%Y-%m-%dT%H:%M:%S%.f") {
        return Some(dt.and_utc().timestamp_millis());
    }
    if let Ok(dt) = chrono::NaiveDateTime::parse_from_str(text.trim_end_matches('Z'), "%Y-%m-%dT%H:%M:%S%.f") {
        return Some(dt.and_utc().timestamp_millis());
    }
    let date = NaiveDate::parse_from_str(text, "%Y-%m-%d")
        .or_else(|_| NaiveDate::parse_from_str(&format!("{text}-01"), "%Y-%m-%d"))
        .or_else(|_| NaiveDate::parse_from_str(&format!("{text}-01-01"), "%Y-%m-%d"))
        .ok()?;
    Some(date.and_hms_opt(0, 0, 0)?.and_utc().timestamp_millis())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn touching_boxes_intersect() {
        let a = BoundingBox::new(0.0, 0.0, 10.0, 10.0).unwrap();
        let b = BoundingBox::new(10.0, 10.0, 20.0, 20.0).unwrap();
        assert!(a.intersects(&b));
        let c = BoundingBox::new(10.1, 10.1, 20.0, 20.0).unwrap();
        assert!(!a.intersects(&c));
    }

    #[test]
    fn rejects_inverted_or_out_of_range() {
        assert!(BoundingBox::new(10.0, 0.0, 0.0, 1.0).is_none());
        assert!(BoundingBox::new(0.0, -91.0, 1.0, 1.0).is_none());
        assert!(BoundingBox::new(f64::NAN, 0.0, 1.0, 1.0).is_none());
    }

    #[test]
    fn instants() {
        assert_eq!(parse_instant("1970-01-01"), Some(0));
        assert_eq!(parse_instant("1970-01-01T00:00:01Z"), Some(1000));
        assert_eq!(parse_instant("1970"), Some(0));
        assert_eq!(parse_instant("1970-02"), Some(31 * 86_400_000));
        assert!(parse_instant("soon").is_none());
    }
}
