use std::path::PathBuf;

use atmohub_core::capabilities::{detect_service_kind, parse_capabilities, CapabilitiesError};
use atmohub_core::{BoundingBox, ServiceType};
use proptest::prelude::*;
use regex::Regex;
use url::Url;

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/capabilities")
}

fn fixture(name: &str) -> Vec<u8> {
    std::fs::read(fixture_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn src() -> Url {
    Url::parse("http://example.org/ows?service=WMS&request=GetCapabilities").unwrap()
}

const PARSEABLE: &[(&str, ServiceType, &str)] = &[
    ("wms-minimal-1.3.0.xml", ServiceType::Wms, "1.3.0"),
    ("wms-nested-1.3.0.xml", ServiceType::Wms, "1.3.0"),
    ("wms-1.1.1.xml", ServiceType::Wms, "1.1.1"),
    ("wfs-1.1.0.xml", ServiceType::Wfs, "1.1.0"),
    ("wfs-2.0.0.xml", ServiceType::Wfs, "2.0.0"),
    ("wcs-1.0.0.xml", ServiceType::Wcs, "1.0.0"),
    ("wcs-2.0.1.xml", ServiceType::Wcs, "2.0.1"),
    ("csw-2.0.2.xml", ServiceType::Csw, "2.0.2"),
    ("wps-1.0.0.xml", ServiceType::Wps, "1.0.0"),
];

/// Counts named layer-like elements with a plain text scan. Fixtures put the
/// name element directly after the opening tag, which keeps this scan simple.
fn scan_named_layers(text: &str) -> usize {
    let patterns = [
        r"<(?:\w+:)?Layer\b[^>]*>\s*<(?:\w+:)?Name>\s*\S",
        r"<(?:\w+:)?FeatureType\b[^>]*>\s*<(?:\w+:)?Name>\s*\S",
        r"<(?:\w+:)?CoverageOfferingBrief\b[^>]*>\s*<(?:\w+:)?name>\s*\S",
        r"<(?:\w+:)?CoverageSummary\b[^>]*>\s*<(?:\w+:)?CoverageId>\s*\S",
    ];
    patterns
        .iter()
        .map(|p| Regex::new(p).unwrap().find_iter(text).count())
        .sum()
}

#[test]
fn every_fixture_parses_with_expected_kind() {
    for (name, kind, version) in PARSEABLE {
        let bytes = fixture(name);
        assert_eq!(
            detect_service_kind(&bytes).unwrap(),
            (*kind, version.to_string()),
            "{name}"
        );
        let (draft, _) = parse_capabilities(&bytes, &src()).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(draft.service_type, *kind);
        assert_eq!(draft.version, *version);
        assert!(!draft.title.is_empty(), "{name} has a title");
    }
}

#[test]
fn layer_counts_match_independent_scan() {
    for (name, _, _) in PARSEABLE {
        let bytes = fixture(name);
        let expected = scan_named_layers(&String::from_utf8_lossy(&bytes));
        let (_, layers) = parse_capabilities(&bytes, &src()).unwrap();
        assert_eq!(layers.len(), expected, "{name}");
        assert!(layers.iter().all(|l| !l.name.is_empty()));
    }
}

#[test]
fn minimal_wms_fixture() {
    let (draft, layers) = parse_capabilities(&fixture("wms-minimal-1.3.0.xml"), &src()).unwrap();
    assert_eq!(draft.service_type, ServiceType::Wms);
    assert_eq!(draft.version, "1.3.0");
    assert_eq!(draft.title, "Ocean Surface Analysis");
    assert_eq!(draft.provider_name, "Ocean Example Lab");
    assert_eq!(draft.contact.as_deref(), Some("Data Desk <desk@ocean.example.org>"));
    assert_eq!(draft.keywords, vec!["ocean", "analysis"]);
    assert_eq!(draft.capabilities_url, src().to_string());

    assert_eq!(layers.len(), 1);
    let sst = &layers[0];
    assert_eq!(sst.name, "sst");
    assert_eq!(sst.title, "Sea Surface Temperature");
    assert_eq!(sst.bounding_box, Some(BoundingBox::WORLD));
    assert_eq!(sst.supported_srs, vec!["EPSG:4326", "CRS:84"]);
    assert_eq!(sst.formats, vec!["image/png", "image/jpeg"]);
    let t = sst.time_extent.as_ref().unwrap();
    assert_eq!((t.start.as_str(), t.end.as_str()), ("2002-06-01", "2012-12-31"));
}

#[test]
fn wms_group_children_inherit_parent_bbox_and_srs() {
    let (draft, layers) = parse_capabilities(&fixture("wms-nested-1.3.0.xml"), &src()).unwrap();
    assert_eq!(draft.provider_name, "Polar Climate Centre");
    let parent_box = BoundingBox::new(-180.0, 60.0, 180.0, 90.0);
    let names: Vec<&str> = layers.iter().map(|l| l.name.as_str()).collect();
    assert_eq!(names, ["air_temperature_2m", "total_cloud_cover"]);
    assert!(layers.iter().all(|l| l.bounding_box == parent_box));
    assert_eq!(layers[0].supported_srs, ["EPSG:4326", "EPSG:3413"]);
    assert_eq!(layers[1].supported_srs, ["EPSG:4326", "EPSG:3413", "EPSG:3995"]);
    // Keywords are not inherited.
    assert!(layers[1].keywords.is_empty());
}

#[test]
fn wms_111_uses_legacy_elements() {
    let (draft, layers) = parse_capabilities(&fixture("wms-1.1.1.xml"), &src()).unwrap();
    assert_eq!(draft.title, "Aerosol Monitoring Maps");
    assert_eq!(layers.len(), 3);
    let aod = layers.iter().find(|l| l.name == "aod_550").unwrap();
    assert_eq!(aod.bounding_box, BoundingBox::new(-180.0, -85.0, 180.0, 85.0));
    assert_eq!(aod.supported_srs, ["EPSG:4326", "EPSG:900913"]);
    let t = aod.time_extent.as_ref().unwrap();
    assert_eq!((t.start.as_str(), t.end.as_str()), ("2001-01", "2010-12"));
    let ozone = layers.iter().find(|l| l.name == "ozone_column").unwrap();
    assert_eq!(ozone.bounding_box, BoundingBox::new(-20.0, 30.0, 40.0, 70.0));
    assert_eq!(ozone.supported_srs, ["EPSG:4326", "EPSG:900913", "EPSG:3857"]);
}

#[test]
fn wfs_feature_types() {
    let (draft, layers) = parse_capabilities(&fixture("wfs-1.1.0.xml"), &src()).unwrap();
    assert_eq!(draft.provider_name, "Met Observation Service");
    assert_eq!(
        draft.contact.as_deref(),
        Some("Station Desk <stations@met.example.net>")
    );
    assert_eq!(layers[0].name, "obs:stations");
    assert_eq!(layers[0].bounding_box, BoundingBox::new(-170.0, -60.0, 175.0, 80.0));
    assert_eq!(layers[0].formats, ["text/xml; subtype=gml/3.1.1", "application/json"]);
    assert_eq!(layers[0].supported_srs.len(), 2);
    assert_eq!(layers[1].formats, ["application/json"]);

    let (_, layers) = parse_capabilities(&fixture("wfs-2.0.0.xml"), &src()).unwrap();
    assert_eq!(layers[0].formats, ["application/gml+xml; version=3.2"]);
    assert_eq!(layers[0].supported_srs, ["urn:ogc:def:crs:EPSG::4326"]);
}

#[test]
fn wcs_coverages() {
    let (draft, layers) = parse_capabilities(&fixture("wcs-1.0.0.xml"), &src()).unwrap();
    assert_eq!(draft.title, "Gridded Climate Coverages");
    assert_eq!(draft.provider_name, "Climate Grid Office");
    assert_eq!(layers[1].name, "hurs_monthly");
    assert_eq!(layers[1].abstract_text, "Near-surface relative humidity.");
    assert_eq!(layers[1].bounding_box, BoundingBox::new(-180.0, -60.0, 180.0, 85.0));

    let (_, layers) = parse_capabilities(&fixture("wcs-2.0.1.xml"), &src()).unwrap();
    assert_eq!(layers[0].name, "olr_daily");
    assert_eq!(layers[0].title, "Daily OLR");
    assert_eq!(layers[0].formats, ["application/netcdf", "image/tiff"]);
}

#[test]
fn catalogue_and_processing_services_have_no_layers() {
    for name in ["csw-2.0.2.xml", "wps-1.0.0.xml"] {
        let (draft, layers) = parse_capabilities(&fixture(name), &src()).unwrap();
        assert!(layers.is_empty(), "{name}");
        assert!(!draft.provider_name.is_empty());
    }
}

#[test]
fn error_fixtures() {
    for name in ["exception-wms.xml", "exception-ows.xml"] {
        assert!(
            matches!(
                parse_capabilities(&fixture(name), &src()),
                Err(CapabilitiesError::NotCapabilities(_))
            ),
            "{name}"
        );
    }
    assert!(matches!(
        parse_capabilities(&fixture("truncated-wms-1.3.0.xml"), &src()),
        Err(CapabilitiesError::MalformedXml(_))
    ));
    assert!(matches!(
        parse_capabilities(&fixture("wms-unsupported-1.0.0.xml"), &src()),
        Err(CapabilitiesError::UnsupportedVersion { .. })
    ));
}

proptest! {
    #[test]
    fn arbitrary_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..512)) {
        let _ = parse_capabilities(&bytes, &src());
    }

    #[test]
    fn truncations_yield_declared_errors_only(cut in 0usize..4000, which in 0usize..9) {
        let bytes = fixture(PARSEABLE[which].0);
        let cut = cut.min(bytes.len());
        match parse_capabilities(&bytes[..cut], &src()) {
            Ok((_, layers)) => prop_assert!(layers.iter().all(|l| !l.name.is_empty())),
            Err(CapabilitiesError::MalformedXml(_) | CapabilitiesError::NotCapabilities(_) | CapabilitiesError::UnsupportedVersion { .. }) => {}
        }
    }

    #[test]
    fn parsing_is_deterministic(which in 0usize..9) {
        let bytes = fixture(PARSEABLE[which].0);
        prop_assert_eq!(parse_capabilities(&bytes, &src()), parse_capabilities(&bytes, &src()));
    }
}
