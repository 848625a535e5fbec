//! CSW-style documents: a static capabilities document and Dublin Core
//! records built from catalogue entries.

use std::fmt::Write;

use quick_xml::escape::escape;
use serde::Serialize;

use crate::catalogue::CatalogEntry;
use crate::config::CatalogueInfo;
use crate::model::BoundingBox;

pub const CSW_VERSION: &str = "2.0.2";
pub const OPERATIONS: [&str; 4] = ["GetCapabilities", "GetRecords", "GetRecordById", "Harvest"];

const NAMESPACES: &str = concat!(
    r#"xmlns:csw="http://www.opengis.net/cat/csw/2.0.2" "#,
    r#"xmlns:dc="http://purl.org/dc/elements/1.1/" "#,
    r#"xmlns:dct="http://purl.org/dc/terms/" "#,
    r#"xmlns:ows="http://www.opengis.net/ows""#
);

/// One layer as a catalogue record, with service fields inlined.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CswRecord {
    pub identifier: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub subject: Vec<String>,
    pub bounding_box: Option<BoundingBox>,
    /// Capabilities URL of the hosting service.
    pub source: String,
    /// Retrieval endpoint of the layer.
    pub references: String,
    pub service_type: String,
    pub service_title: String,
    pub name: String,
}

impl CswRecord {
    pub fn from_entry(entry: &CatalogEntry) -> Self {
        CswRecord {
            identifier: entry.layer.layer_id.to_string(),
            title: entry.meta.title.clone(),
            abstract_text: entry.meta.abstract_text.clone(),
            subject: entry.meta.keywords.clone(),
            bounding_box: entry.layer.bounding_box,
            source: entry.service.url.clone(),
            references: entry.layer.url.clone(),
            service_type: entry.service.service_type.to_string(),
            service_title: entry.service.title.clone(),
            name: entry.layer.name.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RecordSet {
    pub number_of_records_matched: usize,
    pub number_of_records_returned: usize,
    /// 1-based position of the next page, 0 when this is the last.
    pub next_record: usize,
    pub records: Vec<CswRecord>,
}

pub fn capabilities_document(info: &CatalogueInfo) -> String {
    let mut out = String::new();
    out.push_str(r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = write!(out, "\n<csw:Capabilities {NAMESPACES} version=\"{CSW_VERSION}\">\n");
    out.push_str("  <ows:ServiceIdentification>\n");
    let _ = writeln!(out, "    <ows:Title>{}</ows:Title>", escape(info.title.as_str()));
    let _ = writeln!(
        out,
        "    <ows:Abstract>{}</ows:Abstract>",
        escape(info.abstract_text.as_str())
    );
    out.push_str("    <ows:ServiceType>CSW</ows:ServiceType>\n");
    let _ = writeln!(
        out,
        "    <ows:ServiceTypeVersion>{CSW_VERSION}</ows:ServiceTypeVersion>"
    );
    out.push_str("  </ows:ServiceIdentification>\n");
    out.push_str("  <ows:ServiceProvider>\n");
    let _ = writeln!(
        out,
        "    <ows:ProviderName>{}</ows:ProviderName>",
        escape(info.provider.as_str())
    );
    out.push_str("  </ows:ServiceProvider>\n");
    out.push_str("  <ows:OperationsMetadata>\n");
    for op in OPERATIONS {
        let _ = writeln!(
            out,
            "    <ows:Operation name=\"{op}\"><ows:DCP><ows:HTTP><ows:Get/></ows:HTTP></ows:DCP></ows:Operation>"
        );
    }
    out.push_str(
        "    <ows:Constraint name=\"SupportedQueryLanguages\"><ows:Value>CQL_TEXT</ows:Value></ows:Constraint>\n",
    );
    out.push_str("  </ows:OperationsMetadata>\n");
    out.push_str("</csw:Capabilities>\n");
    out
}

fn element(out: &mut String, indent: &str, tag: &str, text: &str) {
    let _ = writeln!(out, "{indent}<{tag}>{}</{tag}>", escape(text));
}

fn record_xml(out: &mut String, r: &CswRecord) {
    out.push_str("    <csw:Record>\n");
    let i = "      ";
    element(out, i, "dc:identifier", &r.identifier);
    element(out, i, "dc:title", &r.title);
    element(out, i, "dct:abstract", &r.abstract_text);
    for s in &r.subject {
        element(out, i, "dc:subject", s);
    }
    element(out, i, "dc:type", "dataset");
    element(out, i, "dc:source", &r.source);
    let _ = writeln!(
        out,
        "{i}<dct:references scheme=\"OGC:{}\">{}</dct:references>",
        escape(r.service_type.as_str()),
        escape(r.references.as_str())
    );
    if let Some(b) = &r.bounding_box {
        let _ = writeln!(
            out,
            "{i}<ows:WGS84BoundingBox><ows:LowerCorner>{} {}</ows:LowerCorner><ows:UpperCorner>{} {}</ows:UpperCorner></ows:WGS84BoundingBox>",
            b.min_lon, b.min_lat, b.max_lon, b.max_lat
        );
    }
    out.push_str("    </csw:Record>\n");
}

pub fn records_document(set: &RecordSet) -> String {
    let mut out = String::new();
    out.push_str(r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = write!(
        out,
        "\n<csw:GetRecordsResponse {NAMESPACES} version=\"{CSW_VERSION}\">\n"
    );
    out.push_str("  <csw:SearchStatus/>\n");
    let _ = writeln!(
        out,
        "  <csw:SearchResults numberOfRecordsMatched=\"{}\" numberOfRecordsReturned=\"{}\" nextRecord=\"{}\" elementSet=\"full\">",
        set.number_of_records_matched, set.number_of_records_returned, set.next_record
    );
    for r in &set.records {
        record_xml(&mut out, r);
    }
    out.push_str("  </csw:SearchResults>\n</csw:GetRecordsResponse>\n");
    out
}

pub fn record_by_id_document(record: &CswRecord) -> String {
    let mut out = String::new();
    out.push_str(r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = write!(out, "\n<csw:GetRecordByIdResponse {NAMESPACES}>\n");
    record_xml(&mut out, record);
    out.push_str("</csw:GetRecordByIdResponse>\n");
    out
}

/// Filters entries by an optional constraint and cuts one page.
/// `start_position` is 1-based.
pub fn get_records(
    entries: &[CatalogEntry],
    constraint: Option<&crate::cql::CqlExpr>,
    start_position: usize,
    max_records: usize,
) -> RecordSet {
    let matched: Vec<&CatalogEntry> = entries
        .iter()
        .filter(|e| constraint.map_or(true, |c| crate::cql::evaluate(c, &crate::cql::CqlRecord::from_entry(e))))
        .collect();
    let records: Vec<CswRecord> = matched
        .iter()
        .skip(start_position.saturating_sub(1))
        .take(max_records)
        .map(|e| CswRecord::from_entry(e))
        .collect();
    let last = start_position.saturating_sub(1) + records.len();
    RecordSet {
        number_of_records_matched: matched.len(),
        number_of_records_returned: records.len(),
        next_record: if last < matched.len() { last + 1 } else { 0 },
        records,
    }
}

pub fn harvest_document(inserted: u32, updated: u32) -> String {
    let mut out = String::new();
    out.push_str(r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = write!(out, "\n<csw:HarvestResponse {NAMESPACES}>\n");
    out.push_str("  <csw:TransactionResponse>\n    <csw:TransactionSummary>\n");
    let _ = writeln!(out, "      <csw:totalInserted>{inserted}</csw:totalInserted>");
    let _ = writeln!(out, "      <csw:totalUpdated>{updated}</csw:totalUpdated>");
    out.push_str("    </csw:TransactionSummary>\n  </csw:TransactionResponse>\n</csw:HarvestResponse>\n");
    out
}
