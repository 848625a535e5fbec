//! Ingestion pipeline: parse, filter for relevance, geolocate, store and
//! score a capabilities document.

use std::sync::Arc;
use std::time::Duration;

use serde::Serialize;
use url::Url;

use crate::capabilities::{parse_capabilities, CapabilitiesError};
use crate::catalogue::{Catalogue, CatalogueError, GeoResolver, ServiceId};
use crate::clock::Clock;
use crate::crawl::{classify_response, host_key, CapabilitiesSink, DocKind, SinkOutcome};
use crate::scoring::{ProbeSample, ScoreBreakdown, Scorer, ScoringError};
use crate::semantic::{relevance_texts, score_relevance, Vocabulary};
use crate::transport::Transport;

#[derive(Debug, thiserror::Error)]
pub enum HarvestError {
    #[error("fetch of {url} failed: {reason}")]
    FetchFailed { url: String, reason: String },
    #[error("{url} is not a capabilities document ({found})")]
    NotCapabilities { url: String, found: String },
    #[error(transparent)]
    Capabilities(#[from] CapabilitiesError),
    #[error(transparent)]
    Catalogue(#[from] CatalogueError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
}

/// Result of ingesting one capabilities document.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HarvestSummary {
    pub url: String,
    /// 1 when the service passed the relevance filter, else 0.
    pub accepted: u32,
    pub rejected: u32,
    pub service_id: Option<ServiceId>,
    pub layer_count: u32,
    pub layers_added: u32,
    pub matched_terms: Vec<String>,
}

/// Rescoring result for one service after a probe.
pub type ProbeOutcome = Result<ScoreBreakdown, ScoringError>;

/// Everything needed to turn documents into scored catalogue records.
#[derive(Clone)]
pub struct Ingestor {
    pub catalogue: Arc<Catalogue>,
    pub vocabulary: Arc<Vocabulary>,
    pub threshold: u32,
    pub geo: Arc<dyn GeoResolver>,
    pub scorer: Scorer,
    pub clock: Arc<dyn Clock>,
}

impl Ingestor {
    /// Ingests an already fetched document. `latency_ms` is stored as the
    /// service's first availability sample.
    pub fn ingest(&self, url: &Url, body: &[u8], latency_ms: u64) -> Result<HarvestSummary, HarvestError> {
        let (service, layers) = parse_capabilities(body, url)?;
        let verdict = score_relevance(&relevance_texts(&service, &layers), &self.vocabulary, self.threshold);
        let mut summary = HarvestSummary {
            url: url.to_string(),
            accepted: 0,
            rejected: 0,
            service_id: None,
            layer_count: layers.len() as u32,
            layers_added: 0,
            matched_terms: verdict.matched_terms.into_iter().collect(),
        };
        if !verdict.relevant {
            tracing::debug!(%url, "rejected by relevance filter");
            summary.rejected = 1;
            return Ok(summary);
        }
        let location = self.geo.resolve(&host_key(url));
        let outcome = self.catalogue.upsert_service(&service, &location, &layers)?;
        self.catalogue.record_probe(&ProbeSample {
            service_id: outcome.service_id,
            timestamp_ms: i64::try_from(self.clock.now_ms()).unwrap_or(i64::MAX),
            latency_ms: Some(latency_ms),
            http_status: Some(200),
        })?;
        self.scorer.rescore_service(&self.catalogue, outcome.service_id)?;
        tracing::info!(%url, service = %outcome.service_id, layers = outcome.layer_count, "ingested");
        summary.accepted = 1;
        summary.service_id = Some(outcome.service_id);
        summary.layer_count = outcome.layer_count;
        summary.layers_added = outcome.layers_added;
        Ok(summary)
    }

    /// Fetches and ingests one capabilities URL.
    pub fn harvest(
        &self,
        url: &Url,
        transport: &dyn Transport,
        timeout: Duration,
    ) -> Result<HarvestSummary, HarvestError> {
        let fetch_failed = |reason: String| HarvestError::FetchFailed {
            url: url.to_string(),
            reason,
        };
        let started = self.clock.now_ms();
        let response = transport
            .request(url.as_str(), timeout)
            .map_err(|e| fetch_failed(e.to_string()))?;
        let latency = self.clock.now_ms().saturating_sub(started);
        if !response.is_success() {
            return Err(fetch_failed(format!("HTTP {}", response.status)));
        }
        match classify_response(response.content_type(), &response.body) {
            DocKind::OwsCapabilities => self.ingest(url, &response.body, latency),
            other => Err(HarvestError::NotCapabilities {
                url: url.to_string(),
                found: format!("{other:?}"),
            }),
        }
    }

    /// Probes every stored service once and rescores it.
    pub fn probe_all(
        &self,
        transport: &dyn Transport,
        timeout: Duration,
    ) -> Result<Vec<(ServiceId, ProbeOutcome)>, CatalogueError> {
        let services = self.catalogue.list_services()?;
        Ok(services
            .into_iter()
            .map(|s| {
                let result = self
                    .scorer
                    .probe_and_rescore(&self.catalogue, s.service_id, transport, self.clock.as_ref(), timeout)
                    .map(|(_, b)| b);
                (s.service_id, result)
            })
            .collect())
    }
}

impl CapabilitiesSink for Ingestor {
    fn accept(&self, url: &Url, body: &[u8], latency_ms: u64) -> SinkOutcome {
        match self.ingest(url, body, latency_ms) {
            Ok(s) if s.accepted > 0 => SinkOutcome::Ingested,
            Ok(_) => SinkOutcome::Rejected,
            Err(e) => SinkOutcome::Failed(e.to_string()),
        }
    }
}
