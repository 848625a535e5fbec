use std::collections::HashMap;
use std::path::Path;

use serde::Serialize;

const DEFAULT_TABLE: &str = include_str!("../../data/geo_suffixes.csv");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeoLocation {
    pub latitude: f64,
    pub longitude: f64,
    pub country: String,
}

impl GeoLocation {
    pub fn new(latitude: f64, longitude: f64, country: &str) -> Self {
        GeoLocation {
            latitude,
            longitude,
            country: country.to_string(),
        }
    }

    pub fn unknown() -> Self {
        Self::new(0.0, 0.0, "unknown")
    }
}

/// Maps a host name to a location.
pub trait GeoResolver: Send + Sync {
    fn resolve(&self, host: &str) -> GeoLocation;
}

/// Offline resolver: exact-host overrides, then the longest matching
/// domain suffix from a `suffix,country,latitude,longitude` table.
#[derive(Debug, Clone)]
pub struct SuffixGeoResolver {
    suffixes: HashMap<String, GeoLocation>,
    overrides: HashMap<String, GeoLocation>,
}

#[derive(Debug, thiserror::Error)]
#[error("geo table line {line}: {reason}")]
pub struct GeoTableError {
    pub line: usize,
    pub reason: String,
}

impl SuffixGeoResolver {
    pub fn from_csv(text: &str) -> Result<Self, GeoTableError> {
        let mut suffixes = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("suffix,") {
                continue;
            }
            let err = |reason: &str| GeoTableError {
                line: idx + 1,
                reason: reason.to_string(),
            };
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let [suffix, country, lat, lon] = cols[..] else {
                return Err(err("expected 4 columns"));
            };
            let lat: f64 = lat.parse().map_err(|_| err("bad latitude"))?;
            let lon: f64 = lon.parse().map_err(|_| err("bad longitude"))?;
            if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
                return Err(err("coordinates out of range"));
            }
            suffixes.insert(
                suffix.trim_start_matches('.').to_ascii_lowercase(),
                GeoLocation::new(lat, lon, &country.to_ascii_lowercase()),
            );
        }
        Ok(SuffixGeoResolver {
            suffixes,
            overrides: HashMap::new(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, GeoTableError> {
        let text = std::fs::read_to_string(path).map_err(|e| GeoTableError {
            line: 0,
            reason: e.to_string(),
        })?;
        Self::from_csv(&text)
    }

    pub fn with_override(mut self, host: &str, location: GeoLocation) -> Self {
        self.overrides.insert(host.to_ascii_lowercase(), location);
        self
    }
}

impl Default for SuffixGeoResolver {
    fn default() -> Self {
        Self::from_csv(DEFAULT_TABLE).expect("bundled geo table is valid")
    }
}

impl GeoResolver for SuffixGeoResolver {
    fn resolve(&self, host: &str) -> GeoLocation {
        let host = host
            .split(':')
            .next()
            .unwrap_or(host)
            .trim_end_matches('.')
            .to_ascii_lowercase();
        if let Some(loc) = self.overrides.get(&host) {
            return loc.clone();
        }
        let mut candidate = host.as_str();
        loop {
            if let Some(loc) = self.suffixes.get(candidate) {
                return loc.clone();
            }
            match candidate.split_once('.') {
                Some((_, rest)) => candidate = rest,
                None => return GeoLocation::unknown(),
            }
        }
    }
}

impl<T: GeoResolver + ?Sized> GeoResolver for std::sync::Arc<T> {
    fn resolve(&self, host: &str) -> GeoLocation {
        (**self).resolve(host)
    }
}
