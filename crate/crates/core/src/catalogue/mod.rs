//! Relational catalogue of services, layers, users, workspaces and analysis
//! profiles, backed by an embedded SQLite database.
//!
//! All access goes through one connection behind a mutex, so writes are
//! serialized and every multi-row mutation runs in a transaction.

mod geo;
mod schema;
mod users;
mod workspace;

use std::path::Path;
use std::sync::{Arc, Mutex, MutexGuard};

use rusqlite::{params, Connection, OptionalExtension, Row, Transaction};
use serde::{Deserialize, Serialize};

use crate::capabilities::{LayerDraft, ServiceDraft};
use crate::clock::{Clock, SystemClock};
use crate::model::{BoundingBox, ServiceType, TimeExtent};
use crate::scoring::ProbeSample;
use crate::workflow::AnalysisProfile;

pub use self::geo::{GeoLocation, GeoResolver, SuffixGeoResolver};
pub use self::users::{is_valid_email, UserProfile};
pub use self::workspace::{load_workspace, Workspace, WorkspaceLayer};

macro_rules! id_type {
    ($name:ident) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub i64);

        impl std::fmt::Display for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_type!(ServiceId);
id_type!(LayerId);
id_type!(WorkspaceId);

#[derive(Debug, thiserror::Error)]
pub enum CatalogueError {
    #[error("storage failure: {0}")]
    StorageFailure(String),
    #[error("user `{0}` is already registered")]
    DuplicateUser(String),
    #[error("`{0}` is not a valid email address")]
    InvalidEmail(String),
    #[error("unknown user `{0}`")]
    UnknownUser(String),
    #[error("unknown workspace {0}")]
    UnknownWorkspace(WorkspaceId),
    #[error("unknown layer {0}")]
    UnknownLayer(LayerId),
    #[error("unknown service {0}")]
    UnknownService(ServiceId),
    #[error("display order {order} is already used in workspace {workspace}")]
    DisplayOrderConflict { workspace: WorkspaceId, order: u32 },
    #[error("layer {layer} is already in workspace {workspace}")]
    AlreadyLinked { workspace: WorkspaceId, layer: LayerId },
    #[error("layer {layer} is not linked to workspace {workspace}")]
    LinkNotFound { workspace: WorkspaceId, layer: LayerId },
    #[error("layer {0} is still linked from a workspace")]
    LayerInUse(LayerId),
    #[error("malformed workspace document: {0}")]
    MalformedDocument(String),
    #[error("invalid style: {0}")]
    InvalidStyle(String),
}

impl From<rusqlite::Error> for CatalogueError {
    fn from(e: rusqlite::Error) -> Self {
        CatalogueError::StorageFailure(e.to_string())
    }
}

impl From<serde_json::Error> for CatalogueError {
    fn from(e: serde_json::Error) -> Self {
        CatalogueError::StorageFailure(format!("column encoding: {e}"))
    }
}

pub type Result<T, E = CatalogueError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ServiceRecord {
    pub service_id: ServiceId,
    pub url: String,
    pub service_type: ServiceType,
    pub version: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub keywords: Vec<String>,
    pub provider_name: String,
    pub contact: Option<String>,
    pub latitude: f64,
    pub longitude: f64,
    pub country: String,
    pub score: f64,
    pub discovered_at: i64,
    pub last_probed_at: Option<i64>,
}

/// Display style of a layer: the catalogue default or a per-workspace override.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Symbol {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opacity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<f64>,
}

impl Symbol {
    pub fn validate(&self) -> Result<()> {
        if let Some(o) = self.opacity {
            if !(0.0..=1.0).contains(&o) {
                return Err(CatalogueError::InvalidStyle(format!("opacity {o} outside [0, 1]")));
            }
        }
        if let Some(s) = self.size {
            if !s.is_finite() || s < 0.0 {
                return Err(CatalogueError::InvalidStyle(format!(
                    "size {s} must be finite and non-negative"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LayerRecord {
    pub layer_id: LayerId,
    pub service_id: ServiceId,
    pub name: String,
    pub url: String,
    pub supported_srs: Vec<String>,
    pub bounding_box: Option<BoundingBox>,
    pub symbol: Option<Symbol>,
    pub quality_score: f64,
    pub owner_user_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LayerMetadata {
    pub layer_id: LayerId,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub keywords: Vec<String>,
    pub formats: Vec<String>,
    pub time_extent: Option<TimeExtent>,
}

/// A layer joined with its metadata and owning service.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub layer: LayerRecord,
    pub meta: LayerMetadata,
    pub service: ServiceRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct UpsertOutcome {
    pub service_id: ServiceId,
    pub created: bool,
    pub layers_added: u32,
    pub layer_count: u32,
}

pub struct Catalogue {
    conn: Mutex<Connection>,
    clock: Arc<dyn Clock>,
    compress_workspaces: bool,
}

impl std::fmt::Debug for Catalogue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Catalogue").finish_non_exhaustive()
    }
}

const SERVICE_COLUMNS: &str = "service_id, url, service_type, version, title, abstract, keywords, provider_name, \
     contact, latitude, longitude, country, score, discovered_at, last_probed_at";
const LAYER_COLUMNS: &str =
    "layer_id, service_id, name, url, supported_srs, bbox, symbol, quality_score, owner_user_id";
const META_COLUMNS: &str = "layer_id, title, abstract, keywords, formats, time_extent";

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string(value)?)
}

fn json_column<T: for<'de> Deserialize<'de>>(row: &Row<'_>, idx: usize) -> rusqlite::Result<T> {
    let text: String = row.get(idx)?;
    serde_json::from_str(&text)
        .map_err(|e| rusqlite::Error::FromSqlConversionFailure(idx, rusqlite::types::Type::Text, Box::new(e)))
}

fn opt_json_column<T: for<'de> Deserialize<'de>>(row: &Row<'_>, idx: usize) -> rusqlite::Result<Option<T>> {
    let text: Option<String> = row.get(idx)?;
    text.map(|t| {
        serde_json::from_str(&t)
            .map_err(|e| rusqlite::Error::FromSqlConversionFailure(idx, rusqlite::types::Type::Text, Box::new(e)))
    })
    .transpose()
}

fn service_from_row(row: &Row<'_>) -> rusqlite::Result<ServiceRecord> {
    let kind: String = row.get(2)?;
    Ok(ServiceRecord {
        service_id: ServiceId(row.get(0)?),
        url: row.get(1)?,
        service_type: kind.parse().map_err(|_| {
            rusqlite::Error::FromSqlConversionFailure(
                2,
                rusqlite::types::Type::Text,
                format!("service type {kind}").into(),
            )
        })?,
        version: row.get(3)?,
        title: row.get(4)?,
        abstract_text: row.get(5)?,
        keywords: json_column(row, 6)?,
        provider_name: row.get(7)?,
        contact: row.get(8)?,
        latitude: row.get(9)?,
        longitude: row.get(10)?,
        country: row.get(11)?,
        score: row.get(12)?,
        discovered_at: row.get(13)?,
        last_probed_at: row.get(14)?,
    })
}

fn layer_from_row(row: &Row<'_>) -> rusqlite::Result<LayerRecord> {
    Ok(LayerRecord {
        layer_id: LayerId(row.get(0)?),
        service_id: ServiceId(row.get(1)?),
        name: row.get(2)?,
        url: row.get(3)?,
        supported_srs: json_column(row, 4)?,
        bounding_box: opt_json_column(row, 5)?,
        symbol: opt_json_column(row, 6)?,
        quality_score: row.get(7)?,
        owner_user_id: row.get(8)?,
    })
}

fn meta_from_row(row: &Row<'_>) -> rusqlite::Result<LayerMetadata> {
    Ok(LayerMetadata {
        layer_id: LayerId(row.get(0)?),
        title: row.get(1)?,
        abstract_text: row.get(2)?,
        keywords: json_column(row, 3)?,
        formats: json_column(row, 4)?,
        time_extent: opt_json_column(row, 5)?,
    })
}

/// Base URL for data requests: the capabilities URL without the
/// `service`, `request` and `version` parameters.
pub fn retrieval_endpoint(capabilities_url: &str) -> String {
    let Ok(mut url) = url::Url::parse(capabilities_url) else {
        return capabilities_url.to_string();
    };
    let kept: Vec<(String, String)> = url
        .query_pairs()
        .filter(|(k, _)| {
            !matches!(
                k.to_ascii_lowercase().as_str(),
                "service" | "request" | "version" | "acceptversions"
            )
        })
        .map(|(k, v)| (k.into_owned(), v.into_owned()))
        .collect();
    if kept.is_empty() {
        url.set_query(None);
    } else {
        url.query_pairs_mut().clear().extend_pairs(kept);
    }
    url.to_string()
}

impl Catalogue {
    /// Opens (creating if needed) a catalogue database file.
    pub fn open(path: &Path) -> Result<Self> {
        Self::from_connection(Connection::open(path)?)
    }

    pub fn open_in_memory() -> Result<Self> {
        Self::from_connection(Connection::open_in_memory()?)
    }

    fn from_connection(conn: Connection) -> Result<Self> {
        conn.execute_batch(schema::SCHEMA)?;
        conn.busy_timeout(std::time::Duration::from_secs(5))?;
        Ok(Catalogue {
            conn: Mutex::new(conn),
            clock: Arc::new(SystemClock),
            compress_workspaces: false,
        })
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    /// Stores new workspace documents DEFLATE-compressed.
    pub fn with_workspace_compression(mut self, enabled: bool) -> Self {
        self.compress_workspaces = enabled;
        self
    }

    fn conn(&self) -> MutexGuard<'_, Connection> {
        // A panic while holding the lock leaves SQLite itself consistent.
        self.conn.lock().unwrap_or_else(|p| p.into_inner())
    }

    fn now(&self) -> i64 {
        i64::try_from(self.clock.now_ms()).unwrap_or(i64::MAX)
    }

    /// Inserts or updates a service by capabilities URL and its layers by
    /// (service, name). Identical input leaves every row unchanged.
    pub fn upsert_service(
        &self,
        draft: &ServiceDraft,
        geo: &GeoLocation,
        layers: &[LayerDraft],
    ) -> Result<UpsertOutcome> {
        let mut conn = self.conn();
        let tx = conn.transaction()?;
        let existing: Option<i64> = tx
            .query_row(
                "SELECT service_id FROM data_source_catalogue WHERE url = ?1",
                [&draft.capabilities_url],
                |r| r.get(0),
            )
            .optional()?;
        let keywords = to_json(&draft.keywords)?;
        let service_id = match existing {
            Some(id) => {
                tx.execute(
                    "UPDATE data_source_catalogue SET service_type = ?2, version = ?3, title = ?4, abstract = ?5, \
                     keywords = ?6, provider_name = ?7, contact = ?8, latitude = ?9, longitude = ?10, country = ?11 \
                     WHERE service_id = ?1",
                    params![
                        id,
                        draft.service_type.as_str(),
                        draft.version,
                        draft.title,
                        draft.abstract_text,
                        keywords,
                        draft.provider_name,
                        draft.contact,
                        geo.latitude,
                        geo.longitude,
                        geo.country,
                    ],
                )?;
                id
            }
            None => {
                tx.execute(
                    "INSERT INTO data_source_catalogue (url, service_type, version, title, abstract, keywords, \
                     provider_name, contact, latitude, longitude, country, score, discovered_at) \
                     VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10, ?11, 0, ?12)",
                    params![
                        draft.capabilities_url,
                        draft.service_type.as_str(),
                        draft.version,
                        draft.title,
                        draft.abstract_text,
                        keywords,
                        draft.provider_name,
                        draft.contact,
                        geo.latitude,
                        geo.longitude,
                        geo.country,
                        self.now(),
                    ],
                )?;
                tx.last_insert_rowid()
            }
        };

        let endpoint = retrieval_endpoint(&draft.capabilities_url);
        let mut added = 0u32;
        for layer in layers {
            if upsert_layer(&tx, service_id, &endpoint, layer)? {
                added += 1;
            }
        }
        let layer_count: i64 = tx.query_row("SELECT COUNT(*) FROM layer WHERE service_id = ?1", [service_id], |r| {
            r.get(0)
        })?;
        tx.commit()?;
        Ok(UpsertOutcome {
            service_id: ServiceId(service_id),
            created: existing.is_none(),
            layers_added: added,
            layer_count: u32::try_from(layer_count).unwrap_or(u32::MAX),
        })
    }

    pub fn get_service(&self, id: ServiceId) -> Result<Option<ServiceRecord>> {
        let conn = self.conn();
        let sql = format!("SELECT {SERVICE_COLUMNS} FROM data_source_catalogue WHERE service_id = ?1");
        Ok(conn.query_row(&sql, [id.0], service_from_row).optional()?)
    }

    pub fn service_by_url(&self, url: &str) -> Result<Option<ServiceRecord>> {
        let conn = self.conn();
        let sql = format!("SELECT {SERVICE_COLUMNS} FROM data_source_catalogue WHERE url = ?1");
        Ok(conn.query_row(&sql, [url], service_from_row).optional()?)
    }

    /// All services ordered by id.
    pub fn list_services(&self) -> Result<Vec<ServiceRecord>> {
        let conn = self.conn();
        let sql = format!("SELECT {SERVICE_COLUMNS} FROM data_source_catalogue ORDER BY service_id");
        let mut stmt = conn.prepare(&sql)?;
        let rows = stmt.query_map([], service_from_row)?;
        Ok(rows.collect::<rusqlite::Result<_>>()?)
    }

    pub fn service_count(&self) -> Result<u64> {
        let n: i64 = self
            .conn()
            .query_row("SELECT COUNT(*) FROM data_source_catalogue", [], |r| r.get(0))?;
        Ok(n as u64)
    }

    pub fn layer_count(&self) -> Result<u64> {
        let n: i64 = self.conn().query_row("SELECT COUNT(*) FROM layer", [], |r| r.get(0))?;
        Ok(n as u64)
    }

    pub fn get_layer(&self, id: LayerId) -> Result<Option<LayerRecord>> {
        let conn = self.conn();
        let sql = format!("SELECT {LAYER_COLUMNS} FROM layer WHERE layer_id = ?1");
        Ok(conn.query_row(&sql, [id.0], layer_from_row).optional()?)
    }

    pub fn layer_metadata(&self, id: LayerId) -> Result<Option<LayerMetadata>> {
        let conn = self.conn();
        let sql = format!("SELECT {META_COLUMNS} FROM layer_metadata WHERE layer_id = ?1");
        Ok(conn.query_row(&sql, [id.0], meta_from_row).optional()?)
    }

    /// All layers ordered by id.
    pub fn list_layers(&self) -> Result<Vec<LayerRecord>> {
        let conn = self.conn();
        let sql = format!("SELECT {LAYER_COLUMNS} FROM layer ORDER BY layer_id");
        let mut stmt = conn.prepare(&sql)?;
        let rows = stmt.query_map([], layer_from_row)?;
        Ok(rows.collect::<rusqlite::Result<_>>()?)
    }

    pub fn layers_of_service(&self, id: ServiceId) -> Result<Vec<LayerRecord>> {
        let conn = self.conn();
        let sql = format!("SELECT {LAYER_COLUMNS} FROM layer WHERE service_id = ?1 ORDER BY layer_id");
        let mut stmt = conn.prepare(&sql)?;
        let rows = stmt.query_map([id.0], layer_from_row)?;
        Ok(rows.collect::<rusqlite::Result<_>>()?)
    }

    pub fn list_layer_metadata(&self) -> Result<Vec<LayerMetadata>> {
        let conn = self.conn();
        let sql = format!("SELECT {META_COLUMNS} FROM layer_metadata ORDER BY layer_id");
        let mut stmt = conn.prepare(&sql)?;
        let rows = stmt.query_map([], meta_from_row)?;
        Ok(rows.collect::<rusqlite::Result<_>>()?)
    }

    /// Every layer joined with its metadata and service, ordered by layer id,
    /// read in one transaction so the three tables are consistent.
    pub fn catalog_entries(&self) -> Result<Vec<CatalogEntry>> {
        let mut conn = self.conn();
        let tx = conn.transaction()?;
        let services: std::collections::HashMap<i64, ServiceRecord> = {
            let sql = format!("SELECT {SERVICE_COLUMNS} FROM data_source_catalogue");
            let mut stmt = tx.prepare(&sql)?;
            let rows = stmt.query_map([], service_from_row)?;
            rows.map(|r| r.map(|s| (s.service_id.0, s)))
                .collect::<rusqlite::Result<_>>()?
        };
        let mut metas: std::collections::HashMap<i64, LayerMetadata> = {
            let sql = format!("SELECT {META_COLUMNS} FROM layer_metadata");
            let mut stmt = tx.prepare(&sql)?;
            let rows = stmt.query_map([], meta_from_row)?;
            rows.map(|r| r.map(|m| (m.layer_id.0, m)))
                .collect::<rusqlite::Result<_>>()?
        };
        let layers: Vec<LayerRecord> = {
            let sql = format!("SELECT {LAYER_COLUMNS} FROM layer ORDER BY layer_id");
            let mut stmt = tx.prepare(&sql)?;
            let rows = stmt.query_map([], layer_from_row)?;
            rows.collect::<rusqlite::Result<_>>()?
        };
        tx.commit()?;
        Ok(layers
            .into_iter()
            .filter_map(|layer| {
                let meta = metas.remove(&layer.layer_id.0)?;
                let service = services.get(&layer.service_id.0)?.clone();
                Some(CatalogEntry { layer, meta, service })
            })
            .collect())
    }

    pub fn catalog_entry(&self, id: LayerId) -> Result<Option<CatalogEntry>> {
        let Some(layer) = self.get_layer(id)? else {
            return Ok(None);
        };
        let Some(meta) = self.layer_metadata(id)? else {
            return Ok(None);
        };
        let Some(service) = self.get_service(layer.service_id)? else {
            return Ok(None);
        };
        Ok(Some(CatalogEntry { layer, meta, service }))
    }

    /// Deletes a layer and its metadata. Refused while any workspace links it.
    pub fn delete_layer(&self, id: LayerId) -> Result<()> {
        let mut conn = self.conn();
        let tx = conn.transaction()?;
        let links: i64 = tx.query_row(
            "SELECT COUNT(*) FROM workspace_layer WHERE layer_id = ?1",
            [id.0],
            |r| r.get(0),
        )?;
        if links > 0 {
            return Err(CatalogueError::LayerInUse(id));
        }
        if tx.execute("DELETE FROM layer WHERE layer_id = ?1", [id.0])? == 0 {
            return Err(CatalogueError::UnknownLayer(id));
        }
        tx.commit()?;
        Ok(())
    }

    pub fn set_layer_symbol(&self, id: LayerId, symbol: Option<&Symbol>) -> Result<()> {
        if let Some(s) = symbol {
            s.validate()?;
        }
        let encoded = symbol.map(to_json).transpose()?;
        let n = self.conn().execute(
            "UPDATE layer SET symbol = ?2 WHERE layer_id = ?1",
            params![id.0, encoded],
        )?;
        if n == 0 {
            return Err(CatalogueError::UnknownLayer(id));
        }
        Ok(())
    }

    pub fn set_service_score(&self, id: ServiceId, score: f64, probed_at: Option<i64>) -> Result<()> {
        let n = self.conn().execute(
            "UPDATE data_source_catalogue SET score = ?2, last_probed_at = COALESCE(?3, last_probed_at) \
             WHERE service_id = ?1",
            params![id.0, score, probed_at],
        )?;
        if n == 0 {
            return Err(CatalogueError::UnknownService(id));
        }
        Ok(())
    }

    pub fn set_layer_quality(&self, id: LayerId, score: f64) -> Result<()> {
        let n = self.conn().execute(
            "UPDATE layer SET quality_score = ?2 WHERE layer_id = ?1",
            params![id.0, score],
        )?;
        if n == 0 {
            return Err(CatalogueError::UnknownLayer(id));
        }
        Ok(())
    }

    pub fn record_probe(&self, sample: &ProbeSample) -> Result<()> {
        let conn = self.conn();
        let n = conn.execute(
            "INSERT INTO probe_sample (service_id, timestamp_ms, latency_ms, http_status) \
             SELECT ?1, ?2, ?3, ?4 WHERE EXISTS (SELECT 1 FROM data_source_catalogue WHERE service_id = ?1)",
            params![
                sample.service_id.0,
                sample.timestamp_ms,
                sample.latency_ms.map(|l| l as i64),
                sample.http_status
            ],
        )?;
        if n == 0 {
            return Err(CatalogueError::UnknownService(sample.service_id));
        }
        Ok(())
    }

    /// The most recent `limit` samples of a service, oldest first.
    pub fn recent_samples(&self, id: ServiceId, limit: usize) -> Result<Vec<ProbeSample>> {
        let conn = self.conn();
        let mut stmt = conn.prepare(
            "SELECT service_id, timestamp_ms, latency_ms, http_status FROM probe_sample \
             WHERE service_id = ?1 ORDER BY sample_id DESC LIMIT ?2",
        )?;
        let rows = stmt.query_map(params![id.0, limit as i64], |r| {
            Ok(ProbeSample {
                service_id: ServiceId(r.get(0)?),
                timestamp_ms: r.get(1)?,
                latency_ms: r.get::<_, Option<i64>>(2)?.map(|l| l.max(0) as u64),
                http_status: r.get(3)?,
            })
        })?;
        let mut samples: Vec<ProbeSample> = rows.collect::<rusqlite::Result<_>>()?;
        samples.reverse();
        Ok(samples)
    }

    pub fn upsert_profile(&self, profile: &AnalysisProfile) -> Result<()> {
        self.conn().execute(
            "INSERT INTO data_analysis (profile_id, service_name, service_url, inputs, outputs, rule_description, \
             constraints, bound_layer_id) VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8) \
             ON CONFLICT(profile_id) DO UPDATE SET service_name = excluded.service_name, \
             service_url = excluded.service_url, inputs = excluded.inputs, outputs = excluded.outputs, \
             rule_description = excluded.rule_description, constraints = excluded.constraints, \
             bound_layer_id = excluded.bound_layer_id",
            params![
                profile.profile_id,
                profile.service_name,
                profile.service_url,
                to_json(&profile.inputs)?,
                to_json(&profile.outputs)?,
                profile.rule_description,
                to_json(&profile.constraints)?,
                profile.bound_layer_id.map(|l| l.0),
            ],
        )?;
        Ok(())
    }

    /// Analysis profiles ordered by id.
    pub fn list_profiles(&self) -> Result<Vec<AnalysisProfile>> {
        let conn = self.conn();
        let mut stmt = conn.prepare(
            "SELECT profile_id, service_name, service_url, inputs, outputs, rule_description, constraints, \
             bound_layer_id FROM data_analysis ORDER BY profile_id",
        )?;
        let rows = stmt.query_map([], |r| {
            Ok(AnalysisProfile {
                profile_id: r.get(0)?,
                service_name: r.get(1)?,
                service_url: r.get(2)?,
                inputs: json_column(r, 3)?,
                outputs: json_column(r, 4)?,
                rule_description: r.get(5)?,
                constraints: json_column(r, 6)?,
                bound_layer_id: r.get::<_, Option<i64>>(7)?.map(LayerId),
            })
        })?;
        Ok(rows.collect::<rusqlite::Result<_>>()?)
    }
}

/// Returns true when the layer row was newly inserted.
fn upsert_layer(tx: &Transaction<'_>, service_id: i64, endpoint: &str, draft: &LayerDraft) -> Result<bool> {
    let srs = to_json(&draft.supported_srs)?;
    let bbox = draft.bounding_box.as_ref().map(to_json).transpose()?;
    let existing: Option<i64> = tx
        .query_row(
            "SELECT layer_id FROM layer WHERE service_id = ?1 AND name = ?2",
            params![service_id, draft.name],
            |r| r.get(0),
        )
        .optional()?;
    let layer_id = match existing {
        Some(id) => {
            tx.execute(
                "UPDATE layer SET url = ?2, supported_srs = ?3, bbox = ?4 WHERE layer_id = ?1",
                params![id, endpoint, srs, bbox],
            )?;
            id
        }
        None => {
            tx.execute(
                "INSERT INTO layer (service_id, name, url, supported_srs, bbox, quality_score) \
                 VALUES (?1, ?2, ?3, ?4, ?5, 0)",
                params![service_id, draft.name, endpoint, srs, bbox],
            )?;
            tx.last_insert_rowid()
        }
    };
    tx.execute(
        "INSERT INTO layer_metadata (layer_id, title, abstract, keywords, formats, time_extent) \
         VALUES (?1, ?2, ?3, ?4, ?5, ?6) \
         ON CONFLICT(layer_id) DO UPDATE SET title = excluded.title, abstract = excluded.abstract, \
         keywords = excluded.keywords, formats = excluded.formats, time_extent = excluded.time_extent",
        params![
            layer_id,
            draft.title,
            draft.abstract_text,
            to_json(&draft.keywords)?,
            to_json(&draft.formats)?,
            draft.time_extent.as_ref().map(to_json).transpose()?,
        ],
    )?;
    Ok(existing.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn draft(url: &str) -> ServiceDraft {
        ServiceDraft {
            service_type: ServiceType::Wms,
            version: "1.3.0".into(),
            title: "Ocean".into(),
            abstract_text: String::new(),
            keywords: vec!["sst".into()],
            provider_name: "Lab".into(),
            contact: None,
            capabilities_url: url.into(),
        }
    }

    fn geo() -> GeoLocation {
        GeoLocation::new(40.0, -100.0, "us")
    }

    #[test]
    fn upsert_is_idempotent() {
        let cat = Catalogue::open_in_memory().unwrap();
        let layers = vec![LayerDraft::named("sst")];
        let a = cat.upsert_service(&draft("http://a/wms"), &geo(), &layers).unwrap();
        let services = cat.list_services().unwrap();
        let all_layers = cat.list_layers().unwrap();
        let b = cat.upsert_service(&draft("http://a/wms"), &geo(), &layers).unwrap();
        assert_eq!(a.service_id, b.service_id);
        assert!(a.created && !b.created);
        assert_eq!((a.layers_added, b.layers_added), (1, 0));
        assert_eq!(cat.list_services().unwrap(), services);
        assert_eq!(cat.list_layers().unwrap(), all_layers);
    }

    #[test]
    fn new_layer_on_reingest() {
        let cat = Catalogue::open_in_memory().unwrap();
        let a = cat
            .upsert_service(&draft("http://a/wms"), &geo(), &[LayerDraft::named("sst")])
            .unwrap();
        let b = cat
            .upsert_service(
                &draft("http://a/wms"),
                &geo(),
                &[LayerDraft::named("sst"), LayerDraft::named("ice")],
            )
            .unwrap();
        assert_eq!(a.service_id, b.service_id);
        assert_eq!(b.layer_count, 2);
        assert_eq!(cat.layer_count().unwrap(), 2);
    }

    #[test]
    fn layer_names_are_unique_per_service_only() {
        let cat = Catalogue::open_in_memory().unwrap();
        cat.upsert_service(&draft("http://a/wms"), &geo(), &[LayerDraft::named("sst")])
            .unwrap();
        cat.upsert_service(&draft("http://b/wms"), &geo(), &[LayerDraft::named("sst")])
            .unwrap();
        let layers = cat.list_layers().unwrap();
        assert_eq!(layers.len(), 2);
        assert_ne!(layers[0].layer_id, layers[1].layer_id);
    }

    #[test]
    fn retrieval_endpoint_drops_protocol_params() {
        assert_eq!(
            retrieval_endpoint("http://h/ows?map=x.map&request=GetCapabilities&service=WMS&version=1.3.0"),
            "http://h/ows?map=x.map"
        );
        assert_eq!(retrieval_endpoint("http://h/wms?service=WMS"), "http://h/wms");
    }

    #[test]
    fn delete_layer_cascades_metadata() {
        let cat = Catalogue::open_in_memory().unwrap();
        cat.upsert_service(&draft("http://a/wms"), &geo(), &[LayerDraft::named("sst")])
            .unwrap();
        let id = cat.list_layers().unwrap()[0].layer_id;
        cat.delete_layer(id).unwrap();
        assert!(cat.layer_metadata(id).unwrap().is_none());
        assert!(matches!(cat.delete_layer(id), Err(CatalogueError::UnknownLayer(_))));
    }

    #[test]
    fn probe_samples_come_back_oldest_first() {
        let cat = Catalogue::open_in_memory().unwrap();
        let id = cat
            .upsert_service(&draft("http://a/wms"), &geo(), &[])
            .unwrap()
            .service_id;
        for (t, l) in [(1, Some(10)), (2, None), (3, Some(30))] {
            cat.record_probe(&ProbeSample {
                service_id: id,
                timestamp_ms: t,
                latency_ms: l,
                http_status: None,
            })
            .unwrap();
        }
        let s = cat.recent_samples(id, 2).unwrap();
        assert_eq!(s.iter().map(|s| s.timestamp_ms).collect::<Vec<_>>(), [2, 3]);
        let bad = ProbeSample {
            service_id: ServiceId(99),
            timestamp_ms: 0,
            latency_ms: None,
            http_status: None,
        };
        assert!(matches!(cat.record_probe(&bad), Err(CatalogueError::UnknownService(_))));
    }
}
