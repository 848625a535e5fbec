use serde::Serialize;

use super::ast::CqlExpr;
use super::eval::{evaluate, like_match, CqlRecord};
use super::thumbnail::thumbnail_url;
use crate::catalogue::{CatalogEntry, Catalogue, CatalogueError, LayerId, ServiceId};
use crate::model::{parse_instant, BoundingBox};

pub const MAX_LIMIT: usize = 1000;
pub const DEFAULT_LIMIT: usize = 20;

#[derive(Debug, thiserror::Error)]
pub enum SearchError {
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error(transparent)]
    Catalogue(#[from] CatalogueError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchQuery {
    pub free_text: Option<String>,
    /// Inclusive ISO-8601 range.
    pub time_range: Option<(String, String)>,
    /// A layer qualifies when it offers any of these formats.
    pub formats: Option<Vec<String>>,
    pub bbox: Option<BoundingBox>,
    pub srs: Option<String>,
    pub cql: Option<CqlExpr>,
    pub offset: usize,
    pub limit: usize,
}

impl Default for SearchQuery {
    fn default() -> Self {
        SearchQuery {
            free_text: None,
            time_range: None,
            formats: None,
            bbox: None,
            srs: None,
            cql: None,
            offset: 0,
            limit: DEFAULT_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchResult {
    pub layer_id: LayerId,
    pub service_id: ServiceId,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub quality_score: f64,
    pub thumbnail_url: Option<String>,
    pub match_rank: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchPage {
    pub total: usize,
    pub offset: usize,
    pub results: Vec<SearchResult>,
}

struct Validated {
    tokens: Vec<String>,
    time: Option<(i64, i64)>,
}

fn validate(q: &SearchQuery) -> Result<Validated, SearchError> {
    if !(1..=MAX_LIMIT).contains(&q.limit) {
        return Err(SearchError::InvalidQuery(format!(
            "limit must be in 1..={MAX_LIMIT}, got {}",
            q.limit
        )));
    }
    let time = match &q.time_range {
        None => None,
        Some((start, end)) => {
            let s =
                parse_instant(start).ok_or_else(|| SearchError::InvalidQuery(format!("bad start time `{start}`")))?;
            let e = parse_instant(end).ok_or_else(|| SearchError::InvalidQuery(format!("bad end time `{end}`")))?;
            if s > e {
                return Err(SearchError::InvalidQuery("time range start is after its end".into()));
            }
            Some((s, e))
        }
    };
    let tokens = q
        .free_text
        .as_deref()
        .unwrap_or("")
        .split_whitespace()
        .map(str::to_string)
        .collect();
    Ok(Validated { tokens, time })
}

fn contains_ci(list: &[String], wanted: &str) -> bool {
    list.iter().any(|v| v.eq_ignore_ascii_case(wanted))
}

/// True when the entry satisfies every supplied facet and the constraint.
fn matches(entry: &CatalogEntry, record: &CqlRecord, q: &SearchQuery, v: &Validated) -> bool {
    if !v.tokens.iter().all(|t| like_match(&format!("%{t}%"), &record.any_text)) {
        return false;
    }
    if let Some((qs, qe)) = v.time {
        let Some(extent) = &entry.meta.time_extent else {
            return false;
        };
        match (parse_instant(&extent.start), parse_instant(&extent.end)) {
            (Some(ls), Some(le)) if ls <= qe && qs <= le => {}
            _ => return false,
        }
    }
    if let Some(formats) = &q.formats {
        if !formats.iter().any(|f| contains_ci(&entry.meta.formats, f)) {
            return false;
        }
    }
    if let Some(b) = &q.bbox {
        if !entry.layer.bounding_box.is_some_and(|lb| lb.intersects(b)) {
            return false;
        }
    }
    if let Some(srs) = &q.srs {
        if !contains_ci(&entry.layer.supported_srs, srs) {
            return false;
        }
    }
    q.cql.as_ref().map_or(true, |e| evaluate(e, record))
}

/// Filters, ranks and pages a snapshot of catalogue entries.
pub fn search_entries(entries: &[CatalogEntry], q: &SearchQuery) -> Result<SearchPage, SearchError> {
    let v = validate(q)?;
    let mut hits: Vec<SearchResult> = entries
        .iter()
        .filter_map(|entry| {
            let record = CqlRecord::from_entry(entry);
            if !matches(entry, &record, q, &v) {
                return None;
            }
            let rank = if v.tokens.is_empty() {
                0.0
            } else {
                let in_title = v
                    .tokens
                    .iter()
                    .filter(|t| like_match(&format!("%{t}%"), &entry.meta.title))
                    .count();
                in_title as f64 / v.tokens.len() as f64
            };
            Some(SearchResult {
                layer_id: entry.layer.layer_id,
                service_id: entry.service.service_id,
                title: entry.meta.title.clone(),
                abstract_text: entry.meta.abstract_text.clone(),
                quality_score: entry.layer.quality_score,
                thumbnail_url: thumbnail_url(entry),
                match_rank: rank,
            })
        })
        .collect();
    hits.sort_by(|a, b| {
        b.match_rank
            .total_cmp(&a.match_rank)
            .then(b.quality_score.total_cmp(&a.quality_score))
            .then(a.layer_id.cmp(&b.layer_id))
    });
    let total = hits.len();
    let results = hits.into_iter().skip(q.offset).take(q.limit).collect();
    Ok(SearchPage {
        total,
        offset: q.offset,
        results,
    })
}

pub fn search(catalogue: &Catalogue, q: &SearchQuery) -> Result<SearchPage, SearchError> {
    validate(q)?;
    search_entries(&catalogue.catalog_entries()?, q)
}
