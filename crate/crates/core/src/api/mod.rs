//! HTTP interface: CSW-style catalogue endpoint, JSON search and
//! statistics, harvesting and background crawl control.

mod csw;
mod error;
mod tasks;

use std::collections::HashMap;
use std::future::Future;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use url::Url;

pub use self::csw::{
    capabilities_document, get_records, record_by_id_document, records_document, CswRecord, RecordSet, CSW_VERSION,
    OPERATIONS,
};
pub use self::error::{ApiError, ApiErrorCode};
pub use self::tasks::{TaskRegistry, TaskStatus};

use crate::catalogue::{Catalogue, LayerId, SuffixGeoResolver};
use crate::clock::{Clock, SystemClock};
use crate::config::{CatalogueInfo, Config};
use crate::cql::{parse_cql, search_entries, SearchQuery, MAX_LIMIT};
use crate::crawl::{
    normalize_url, run_crawl, CannedSearch, CrawlConfig, CrawlControl, CrawlReport, CrawlSpec, CrawlTask, SeedProvider,
};
use crate::harvest::{HarvestSummary, Ingestor};
use crate::model::BoundingBox;
use crate::scoring::Scorer;
use crate::semantic::Vocabulary;
use crate::stats::{classify_countries, count_by_country, rank_providers, DEFAULT_CLASSES};
use crate::transport::{HttpTransport, SimulatedWeb, Transport};

#[derive(Debug, thiserror::Error)]
pub enum StartupError {
    #[error("cannot open catalogue: {0}")]
    Catalogue(#[from] crate::catalogue::CatalogueError),
    #[error("cannot load vocabulary: {0}")]
    Vocabulary(#[from] crate::semantic::VocabularyError),
    #[error("cannot load simulated site: {0}")]
    Site(#[from] crate::transport::SiteManifestError),
    #[error("cannot load seed index: {0}")]
    Seeds(#[from] crate::crawl::SeedError),
    #[error("invalid scoring parameters: {0}")]
    Scoring(#[from] crate::scoring::ScoringError),
}

/// Shared services behind every route.
pub struct AppState {
    pub ingestor: Ingestor,
    pub transport: Arc<dyn Transport>,
    pub seeds: Option<Arc<dyn SeedProvider>>,
    pub crawl: CrawlConfig,
    pub fetch_timeout: Duration,
    pub info: CatalogueInfo,
    pub api_token: Option<String>,
    pub tasks: TaskRegistry,
}

impl AppState {
    /// Minimal state around an existing catalogue and transport, using the
    /// bundled vocabulary and geo table and no API token.
    pub fn new(catalogue: Arc<Catalogue>, transport: Arc<dyn Transport>, clock: Arc<dyn Clock>) -> Self {
        AppState {
            ingestor: Ingestor {
                catalogue,
                vocabulary: Arc::new(Vocabulary::builtin()),
                threshold: crate::semantic::DEFAULT_THRESHOLD,
                geo: Arc::new(SuffixGeoResolver::default()),
                scorer: Scorer::default(),
                clock,
            },
            transport,
            seeds: None,
            crawl: CrawlConfig::default(),
            fetch_timeout: Duration::from_secs(10),
            info: CatalogueInfo::default(),
            api_token: None,
            tasks: TaskRegistry::new(),
        }
    }

    pub fn from_config(config: &Config) -> Result<Self, StartupError> {
        let clock: Arc<dyn Clock> = Arc::new(SystemClock);
        let catalogue = match &config.store_path {
            Some(path) => Catalogue::open(path)?,
            None => Catalogue::open_in_memory()?,
        }
        .with_clock(clock.clone());
        let transport: Arc<dyn Transport> = match &config.crawl.simulated_site {
            Some(path) => Arc::new(SimulatedWeb::from_manifest(path)?.with_clock(clock.clone())),
            None => Arc::new(HttpTransport::new(config.crawl.user_agent.clone())),
        };
        let mut state = AppState::new(Arc::new(catalogue), transport, clock);
        if let Some(path) = &config.vocabulary_path {
            state.ingestor.vocabulary = Arc::new(Vocabulary::from_file(path)?);
        }
        state.ingestor.threshold = config.relevance_threshold;
        state.ingestor.scorer = Scorer::new(config.weights, config.half_life_ms)?;
        if let Some(path) = &config.crawl.seed_index {
            state.seeds = Some(Arc::new(CannedSearch::load(path)?));
        }
        state.crawl.respect_robots = config.crawl.respect_robots;
        state.crawl.user_agent = config.crawl.user_agent.clone();
        state.crawl.workers = config.crawl.workers.max(1);
        state.crawl.fetch_timeout = Duration::from_millis(config.crawl.fetch_timeout_ms);
        state.fetch_timeout = state.crawl.fetch_timeout;
        state.info = config.catalogue.clone();
        state.api_token = config.api_token.clone();
        Ok(state)
    }

    pub fn catalogue(&self) -> &Catalogue {
        &self.ingestor.catalogue
    }

    /// Validates a crawl spec and resolves its seeds.
    pub fn build_task(&self, task_id: &str, spec: &CrawlSpec) -> Result<CrawlTask, ApiError> {
        if spec.keywords.is_empty() && spec.seed_urls.is_empty() {
            return Err(ApiError::invalid("keywords", "a crawl needs keywords or seed URLs"));
        }
        let mut seeds = Vec::new();
        for raw in &spec.seed_urls {
            seeds.push(normalize_url(raw).map_err(|e| ApiError::invalid("seedUrls", e.to_string()))?);
        }
        if !spec.keywords.is_empty() {
            match &self.seeds {
                Some(provider) => seeds.extend(
                    provider
                        .seeds(&spec.keywords)
                        .map_err(|e| ApiError::invalid("keywords", e.to_string()))?,
                ),
                None if spec.seed_urls.is_empty() => {
                    return Err(ApiError::invalid(
                        "keywords",
                        "no seed provider is configured for keyword crawls",
                    ))
                }
                None => {}
            }
        }
        if seeds.is_empty() {
            return Err(ApiError::invalid("keywords", "the keywords produced no seed URLs"));
        }
        Ok(
            CrawlTask::new(task_id, seeds, spec.max_depth, spec.max_pages, spec.per_host_delay_ms)
                .with_keywords(spec.keywords.clone()),
        )
    }

    /// Runs a crawl on the calling thread.
    pub fn run_task(&self, task: &mut CrawlTask, control: &CrawlControl) -> Result<CrawlReport, ApiError> {
        run_crawl(
            task,
            self.transport.as_ref(),
            self.ingestor.clock.as_ref(),
            &self.ingestor,
            &self.crawl,
            control,
        )
        .map_err(ApiError::internal)
    }

    /// Starts a crawl on a background thread.
    pub fn start_crawl(self: &Arc<Self>, spec: CrawlSpec) -> Result<TaskStatus, ApiError> {
        let task_id = uuid::Uuid::new_v4().to_string();
        let mut task = self.build_task(&task_id, &spec)?;
        let control = Arc::new(CrawlControl::default());
        let state = Arc::clone(self);
        let worker_control = Arc::clone(&control);
        let thread = std::thread::Builder::new()
            .name(format!("crawl-{task_id}"))
            .spawn(move || match state.run_task(&mut task, &worker_control) {
                Ok(report) => tracing::info!(task = %task.task_id, ?report, "crawl finished"),
                Err(e) => tracing::error!(task = %task.task_id, error = %e.message, "crawl failed"),
            })
            .map_err(ApiError::internal)?;
        self.tasks.insert(&task_id, spec, control, thread);
        self.tasks
            .status(&task_id)
            .ok_or_else(|| ApiError::internal("task vanished"))
    }

    pub fn harvest(&self, url: &str) -> Result<HarvestSummary, ApiError> {
        let url = Url::parse(url).map_err(|e| ApiError::invalid("url", e.to_string()))?;
        Ok(self
            .ingestor
            .harvest(&url, self.transport.as_ref(), self.fetch_timeout)?)
    }

    fn authorize(&self, headers: &HeaderMap) -> Result<(), ApiError> {
        let Some(token) = &self.api_token else {
            return Ok(());
        };
        let presented = headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "));
        if presented == Some(token.as_str()) {
            Ok(())
        } else {
            Err(ApiError::new(ApiErrorCode::Unauthorized, "missing or wrong API token"))
        }
    }
}

type Shared = Arc<AppState>;

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/csw", get(csw_handler))
        .route("/harvest", post(harvest_handler))
        .route("/search", get(search_handler))
        .route("/stats/countries", get(countries_handler))
        .route("/stats/providers", get(providers_handler))
        .route("/crawl", post(crawl_start_handler))
        .route("/crawl/{id}", get(crawl_status_handler).delete(crawl_cancel_handler))
        .fallback(|| async { ApiError::not_found("no such route") })
        .method_not_allowed_fallback(|| async {
            ApiError::new(ApiErrorCode::OperationNotSupported, "method not allowed on this route")
        })
        .with_state(state)
}

/// Serves until `shutdown` resolves, then cancels running crawls so their
/// writes complete before returning.
pub async fn serve(
    listener: tokio::net::TcpListener,
    state: Shared,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state.clone()))
        .with_graceful_shutdown(shutdown)
        .await?;
    let tasks = state.clone();
    tokio::task::spawn_blocking(move || {
        for id in tasks.tasks.ids() {
            tasks.tasks.cancel(&id);
        }
    })
    .await
    .map_err(std::io::Error::other)?;
    Ok(())
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(ApiError::internal)?
}

/// Query pairs with lowercased keys; the last occurrence of a key wins.
fn params(query: Result<Query<Vec<(String, String)>>, QueryRejection>) -> Result<HashMap<String, String>, ApiError> {
    let Query(pairs) = query.map_err(|e| ApiError::invalid("query", e.body_text()))?;
    Ok(pairs.into_iter().map(|(k, v)| (k.to_ascii_lowercase(), v)).collect())
}

fn parse_param<T: std::str::FromStr>(
    p: &HashMap<String, String>,
    key: &str,
    locator: &str,
) -> Result<Option<T>, ApiError>
where
    T::Err: std::fmt::Display,
{
    p.get(key)
        .map(|v| {
            v.trim()
                .parse::<T>()
                .map_err(|e| ApiError::invalid(locator, format!("`{v}`: {e}")))
        })
        .transpose()
}

fn xml(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/xml; charset=utf-8")], body).into_response()
}

fn wants_json(p: &HashMap<String, String>, headers: &HeaderMap) -> bool {
    if let Some(format) = p.get("outputformat") {
        return format.to_ascii_lowercase().contains("json");
    }
    headers
        .get(header::ACCEPT)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.contains("application/json"))
}

async fn csw_handler(
    State(state): State<Shared>,
    headers: HeaderMap,
    query: Result<Query<Vec<(String, String)>>, QueryRejection>,
) -> Result<Response, ApiError> {
    let p = params(query)?;
    if let Some(service) = p.get("service") {
        if !service.eq_ignore_ascii_case("CSW") {
            return Err(ApiError::invalid("service", format!("unsupported service `{service}`")));
        }
    }
    let request = p
        .get("request")
        .ok_or_else(|| ApiError::invalid("request", "missing request parameter"))?
        .clone();
    let json = wants_json(&p, &headers);
    match request.to_ascii_lowercase().as_str() {
        "getcapabilities" => Ok(xml(capabilities_document(&state.info))),
        "getrecords" => {
            if let Some(lang) = p.get("constraintlanguage") {
                if !lang.eq_ignore_ascii_case("CQL_TEXT") {
                    return Err(ApiError::invalid("constraintLanguage", "only CQL_TEXT is supported"));
                }
            }
            let constraint = match p.get("constraint").map(|c| c.trim()).filter(|c| !c.is_empty()) {
                Some(text) => Some(parse_cql(text).map_err(|e| ApiError::invalid("constraint", e.to_string()))?),
                None => None,
            };
            let start: usize = parse_param(&p, "startposition", "startPosition")?.unwrap_or(1);
            if start == 0 {
                return Err(ApiError::invalid("startPosition", "startPosition is 1-based"));
            }
            let max: usize = parse_param(&p, "maxrecords", "maxRecords")?.unwrap_or(10);
            if max > MAX_LIMIT {
                return Err(ApiError::invalid(
                    "maxRecords",
                    format!("maxRecords must be at most {MAX_LIMIT}"),
                ));
            }
            let set = blocking(move || {
                let entries = state.catalogue().catalog_entries()?;
                Ok(get_records(&entries, constraint.as_ref(), start, max))
            })
            .await?;
            Ok(if json {
                Json(set).into_response()
            } else {
                xml(records_document(&set))
            })
        }
        "getrecordbyid" => {
            let id: i64 =
                parse_param(&p, "id", "id")?.ok_or_else(|| ApiError::invalid("id", "missing id parameter"))?;
            let entry = blocking(move || Ok(state.catalogue().catalog_entry(LayerId(id))?)).await?;
            let record = CswRecord::from_entry(&entry.ok_or_else(|| ApiError::not_found(format!("no record {id}")))?);
            Ok(if json {
                Json(record).into_response()
            } else {
                xml(record_by_id_document(&record))
            })
        }
        "harvest" => {
            state.authorize(&headers)?;
            let source = p
                .get("source")
                .ok_or_else(|| ApiError::invalid("source", "missing source parameter"))?
                .clone();
            let summary = blocking(move || state.harvest(&source).map_err(relocate("url", "source"))).await?;
            let updated = if summary.accepted > 0 {
                summary.layer_count.saturating_sub(summary.layers_added)
            } else {
                0
            };
            Ok(if json {
                Json(summary).into_response()
            } else {
                xml(csw::harvest_document(summary.layers_added, updated))
            })
        }
        other => Err(ApiError {
            locator: Some("request".into()),
            ..ApiError::new(
                ApiErrorCode::OperationNotSupported,
                format!("operation `{other}` is not supported"),
            )
        }),
    }
}

fn relocate(from: &'static str, to: &'static str) -> impl Fn(ApiError) -> ApiError {
    move |mut e| {
        if e.locator.as_deref() == Some(from) {
            e.locator = Some(to.to_string());
        }
        e
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HarvestRequest {
    url: String,
}

async fn harvest_handler(
    State(state): State<Shared>,
    headers: HeaderMap,
    body: Result<Json<HarvestRequest>, JsonRejection>,
) -> Result<Json<HarvestSummary>, ApiError> {
    state.authorize(&headers)?;
    let Json(req) = body.map_err(|e| ApiError::invalid("body", e.body_text()))?;
    Ok(Json(blocking(move || state.harvest(&req.url)).await?))
}

/// Builds a search query from `/search` parameters.
pub fn search_query_from_params(p: &HashMap<String, String>) -> Result<SearchQuery, ApiError> {
    let mut q = SearchQuery {
        free_text: p.get("q").or_else(|| p.get("freetext")).cloned(),
        srs: p.get("srs").cloned(),
        ..SearchQuery::default()
    };
    if let Some(text) = p.get("cql").map(|c| c.trim()).filter(|c| !c.is_empty()) {
        q.cql = Some(parse_cql(text).map_err(|e| ApiError::invalid("cql", e.to_string()))?);
    }
    match (p.get("timestart"), p.get("timeend")) {
        (Some(s), Some(e)) => q.time_range = Some((s.clone(), e.clone())),
        (None, None) => {}
        (Some(_), None) => return Err(ApiError::invalid("timeEnd", "timeStart needs timeEnd")),
        (None, Some(_)) => return Err(ApiError::invalid("timeStart", "timeEnd needs timeStart")),
    }
    if let Some(formats) = p.get("formats") {
        q.formats = Some(
            formats
                .split(',')
                .map(|f| f.trim().to_string())
                .filter(|f| !f.is_empty())
                .collect(),
        );
    }
    if let Some(text) = p.get("bbox") {
        let parts: Result<Vec<f64>, _> = text.split(',').map(|v| v.trim().parse::<f64>()).collect();
        q.bbox = match parts.as_deref() {
            Ok([a, b, c, d]) => BoundingBox::new(*a, *b, *c, *d),
            _ => None,
        };
        if q.bbox.is_none() {
            return Err(ApiError::invalid("bbox", "bbox must be minLon,minLat,maxLon,maxLat"));
        }
    }
    q.offset = parse_param(p, "offset", "offset")?.unwrap_or(0);
    q.limit = parse_param(p, "limit", "limit")?.unwrap_or(q.limit);
    if !(1..=MAX_LIMIT).contains(&q.limit) {
        return Err(ApiError::invalid("limit", format!("limit must be in 1..={MAX_LIMIT}")));
    }
    Ok(q)
}

async fn search_handler(
    State(state): State<Shared>,
    query: Result<Query<Vec<(String, String)>>, QueryRejection>,
) -> Result<Response, ApiError> {
    let q = search_query_from_params(&params(query)?)?;
    let page = blocking(move || {
        let entries = state.catalogue().catalog_entries()?;
        search_entries(&entries, &q).map_err(|e| ApiError::invalid("query", e.to_string()))
    })
    .await?;
    Ok(Json(page).into_response())
}

async fn countries_handler(
    State(state): State<Shared>,
    query: Result<Query<Vec<(String, String)>>, QueryRejection>,
) -> Result<Response, ApiError> {
    let p = params(query)?;
    let k: usize = parse_param(&p, "k", "k")?.unwrap_or(DEFAULT_CLASSES);
    if k == 0 {
        return Err(ApiError::invalid("k", "k must be at least 1"));
    }
    let result = blocking(move || {
        let services = state.catalogue().list_services()?;
        Ok(classify_countries(&count_by_country(&services, None), k))
    })
    .await?;
    Ok(Json(result).into_response())
}

async fn providers_handler(
    State(state): State<Shared>,
    query: Result<Query<Vec<(String, String)>>, QueryRejection>,
) -> Result<Response, ApiError> {
    let p = params(query)?;
    let n: usize = parse_param(&p, "n", "n")?.unwrap_or(10);
    if n == 0 {
        return Err(ApiError::invalid("n", "n must be at least 1"));
    }
    let country = p.get("country").cloned();
    let result = blocking(move || {
        let services = state.catalogue().list_services()?;
        rank_providers(&services, n, country.as_deref()).map_err(|e| ApiError::invalid("n", e.to_string()))
    })
    .await?;
    Ok(Json(result).into_response())
}

async fn crawl_start_handler(
    State(state): State<Shared>,
    headers: HeaderMap,
    body: Result<Json<CrawlSpec>, JsonRejection>,
) -> Result<Response, ApiError> {
    state.authorize(&headers)?;
    let Json(spec) = body.map_err(|e| ApiError::invalid("body", e.body_text()))?;
    let status = blocking(move || state.start_crawl(spec)).await?;
    Ok((StatusCode::ACCEPTED, Json(status)).into_response())
}

async fn crawl_status_handler(
    State(state): State<Shared>,
    Path(id): Path<String>,
) -> Result<Json<TaskStatus>, ApiError> {
    state
        .tasks
        .status(&id)
        .map(Json)
        .ok_or_else(|| ApiError::not_found(format!("no crawl task {id}")))
}

async fn crawl_cancel_handler(
    State(state): State<Shared>,
    headers: HeaderMap,
    Path(id): Path<String>,
) -> Result<Json<TaskStatus>, ApiError> {
    state.authorize(&headers)?;
    blocking(move || {
        state
            .tasks
            .cancel(&id)
            .ok_or_else(|| ApiError::not_found(format!("no crawl task {id}")))
    })
    .await
    .map(Json)
}
