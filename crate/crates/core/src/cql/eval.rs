use std::cmp::Ordering;
use std::collections::HashMap;

use super::ast::{CmpOp, CqlExpr, Literal};
use crate::catalogue::CatalogEntry;
use crate::model::BoundingBox;

/// A flattened layer-plus-service view for constraint evaluation. Property
/// names are stored lowercase; list-valued properties hold one value per
/// element and a predicate holds if any element satisfies it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CqlRecord {
    props: HashMap<String, Vec<String>>,
    pub bbox: Option<BoundingBox>,
    pub any_text: String,
}

impl CqlRecord {
    pub fn new() -> Self {
        CqlRecord::default()
    }

    pub fn set(&mut self, name: &str, value: impl Into<String>) -> &mut Self {
        self.props.insert(name.to_ascii_lowercase(), vec![value.into()]);
        self
    }

    pub fn set_list(&mut self, name: &str, values: Vec<String>) -> &mut Self {
        self.props.insert(name.to_ascii_lowercase(), values);
        self
    }

    pub fn get(&self, name: &str) -> Option<&[String]> {
        self.props
            .get(&name.to_ascii_lowercase())
            .map(Vec::as_slice)
            .filter(|v| !v.is_empty())
    }

    /// Builds the record for a catalogue entry. AnyText covers the layer's
    /// title, abstract and keywords.
    pub fn from_entry(entry: &CatalogEntry) -> Self {
        let (layer, meta, service) = (&entry.layer, &entry.meta, &entry.service);
        let mut r = CqlRecord::new();
        r.set("identifier", layer.layer_id.to_string())
            .set("layerId", layer.layer_id.to_string())
            .set("serviceId", service.service_id.to_string())
            .set("name", layer.name.clone())
            .set("title", meta.title.clone())
            .set("abstract", meta.abstract_text.clone())
            .set_list("keywords", meta.keywords.clone())
            .set_list("subject", meta.keywords.clone())
            .set_list("format", meta.formats.clone())
            .set_list("srs", layer.supported_srs.clone())
            .set("qualityScore", layer.quality_score.to_string())
            .set("url", layer.url.clone())
            .set("source", service.url.clone())
            .set("serviceType", service.service_type.as_str())
            .set("version", service.version.clone())
            .set("serviceTitle", service.title.clone())
            .set("provider", service.provider_name.clone())
            .set("country", service.country.clone())
            .set("score", service.score.to_string());
        if let Some(t) = &meta.time_extent {
            r.set("timeStart", t.start.clone()).set("timeEnd", t.end.clone());
        }
        r.bbox = layer.bounding_box;
        r.any_text = [meta.title.as_str(), meta.abstract_text.as_str()]
            .into_iter()
            .chain(meta.keywords.iter().map(String::as_str))
            .collect::<Vec<_>>()
            .join(" ");
        r
    }
}

/// Case-insensitive LIKE: `%` matches any run, `_` any single character,
/// anchored at both ends.
pub fn like_match(pattern: &str, text: &str) -> bool {
    let p: Vec<char> = pattern.to_lowercase().chars().collect();
    let t: Vec<char> = text.to_lowercase().chars().collect();
    // Greedy two-pointer matcher with backtracking to the last `%`.
    let (mut pi, mut ti) = (0, 0);
    let mut star: Option<(usize, usize)> = None;
    while ti < t.len() {
        if pi < p.len() && (p[pi] == '_' || (p[pi] != '%' && p[pi] == t[ti])) {
            pi += 1;
            ti += 1;
        } else if pi < p.len() && p[pi] == '%' {
            star = Some((pi, ti));
            pi += 1;
        } else if let Some((sp, st)) = star {
            pi = sp + 1;
            ti = st + 1;
            star = Some((sp, st + 1));
        } else {
            return false;
        }
    }
    p[pi..].iter().all(|c| *c == '%')
}

fn as_number(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn compare(value: &str, op: CmpOp, literal: &Literal) -> bool {
    let lit_text = match literal {
        Literal::Str(s) => s.clone(),
        Literal::Num(n) => n.to_string(),
    };
    let lit_num = match literal {
        Literal::Num(n) => Some(*n),
        Literal::Str(s) => as_number(s),
    };
    let ord = match (as_number(value), lit_num) {
        (Some(a), Some(b)) => a.partial_cmp(&b).unwrap_or(Ordering::Equal),
        _ => value.to_lowercase().cmp(&lit_text.to_lowercase()),
    };
    op.holds(ord)
}

/// Evaluates a constraint. Missing properties make their predicate false.
pub fn evaluate(expr: &CqlExpr, record: &CqlRecord) -> bool {
    match expr {
        CqlExpr::Comparison { property, op, literal } => record
            .get(property)
            .is_some_and(|values| values.iter().any(|v| compare(v, *op, literal))),
        CqlExpr::Like { property, pattern } => record
            .get(property)
            .is_some_and(|values| values.iter().any(|v| like_match(pattern, v))),
        CqlExpr::AnyTextLike(pattern) => like_match(pattern, &record.any_text),
        CqlExpr::And(a, b) => evaluate(a, record) && evaluate(b, record),
        CqlExpr::Or(a, b) => evaluate(a, record) || evaluate(b, record),
        CqlExpr::Not(e) => !evaluate(e, record),
        CqlExpr::BboxIntersects {
            min_lon,
            min_lat,
            max_lon,
            max_lat,
        } => record.bbox.is_some_and(|b| {
            b.min_lon <= *max_lon && *min_lon <= b.max_lon && b.min_lat <= *max_lat && *min_lat <= b.max_lat
        }),
    }
}
