//! Quality scores from metadata completeness and probe latency.
//!
//! `combined = wC * completeness + wL * latencyScore`, where completeness is
//! the filled fraction of a six-item checklist and the latency score decays
//! by half for every `halfLife` milliseconds of median response time.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::capabilities::{LayerDraft, ServiceDraft};
use crate::catalogue::{Catalogue, CatalogueError, LayerMetadata, LayerRecord, ServiceId, ServiceRecord};
use crate::clock::Clock;
use crate::model::BoundingBox;
use crate::transport::Transport;

pub const DEFAULT_HALF_LIFE_MS: f64 = 2000.0;
pub const SAMPLE_WINDOW: usize = 10;
/// Latency charged to a failed probe, in half-lives.
pub const FAILURE_HALF_LIVES: f64 = 4.0;

#[derive(Debug, thiserror::Error)]
pub enum ScoringError {
    #[error("no probe samples")]
    NoSamples,
    #[error("weights must be non-negative and sum to 1 (got {0} and {1})")]
    InvalidWeights(f64, f64),
    #[error("half-life must be positive (got {0})")]
    InvalidHalfLife(f64),
    #[error(transparent)]
    Catalogue(#[from] CatalogueError),
}

/// One capabilities request against a service. `latency_ms == None` marks a
/// failed probe.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProbeSample {
    pub service_id: ServiceId,
    pub timestamp_ms: i64,
    pub latency_ms: Option<u64>,
    pub http_status: Option<u16>,
}

impl ProbeSample {
    pub fn is_failure(&self) -> bool {
        self.latency_ms.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScoreWeights {
    pub completeness: f64,
    pub latency: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights {
            completeness: 0.5,
            latency: 0.5,
        }
    }
}

impl ScoreWeights {
    pub fn new(completeness: f64, latency: f64) -> Result<Self, ScoringError> {
        let w = ScoreWeights { completeness, latency };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), ScoringError> {
        let ok = [self.completeness, self.latency]
            .iter()
            .all(|w| w.is_finite() && *w >= 0.0)
            && ((self.completeness + self.latency) - 1.0).abs() <= 1e-9;
        if ok {
            Ok(())
        } else {
            Err(ScoringError::InvalidWeights(self.completeness, self.latency))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ScoreBreakdown {
    pub completeness: f64,
    pub latency_score: f64,
    pub combined: f64,
    pub weights: ScoreWeights,
}

/// The fields inspected by [`completeness`].
#[derive(Debug, Clone, Copy)]
pub struct MetadataView<'a> {
    pub title: &'a str,
    pub abstract_text: &'a str,
    pub keywords: &'a [String],
    pub bounding_box: Option<&'a BoundingBox>,
    pub supported_srs: &'a [String],
    pub contact: Option<&'a str>,
    pub provider: &'a str,
}

impl<'a> MetadataView<'a> {
    /// A service view; spatial fields come from the first layer declaring them.
    pub fn of_draft(service: &'a ServiceDraft, layers: &'a [LayerDraft]) -> Self {
        MetadataView {
            title: &service.title,
            abstract_text: &service.abstract_text,
            keywords: &service.keywords,
            bounding_box: layers.iter().find_map(|l| l.bounding_box.as_ref()),
            supported_srs: layers
                .iter()
                .map(|l| l.supported_srs.as_slice())
                .find(|s| has_text(s))
                .unwrap_or(&[]),
            contact: service.contact.as_deref(),
            provider: &service.provider_name,
        }
    }

    pub fn of_service(service: &'a ServiceRecord, layers: &'a [LayerRecord]) -> Self {
        MetadataView {
            title: &service.title,
            abstract_text: &service.abstract_text,
            keywords: &service.keywords,
            bounding_box: layers.iter().find_map(|l| l.bounding_box.as_ref()),
            supported_srs: layers
                .iter()
                .map(|l| l.supported_srs.as_slice())
                .find(|s| has_text(s))
                .unwrap_or(&[]),
            contact: service.contact.as_deref(),
            provider: &service.provider_name,
        }
    }

    /// A layer view; the contact/provider item comes from the owning service.
    pub fn of_layer(layer: &'a LayerRecord, meta: &'a LayerMetadata, service: &'a ServiceRecord) -> Self {
        MetadataView {
            title: &meta.title,
            abstract_text: &meta.abstract_text,
            keywords: &meta.keywords,
            bounding_box: layer.bounding_box.as_ref(),
            supported_srs: &layer.supported_srs,
            contact: service.contact.as_deref(),
            provider: &service.provider_name,
        }
    }

    /// The six checklist items in order: title, abstract, keywords,
    /// bounding box, SRS, contact or provider.
    pub fn checklist(&self) -> [bool; 6] {
        let filled = |s: &str| !s.trim().is_empty();
        [
            filled(self.title),
            filled(self.abstract_text),
            has_text(self.keywords),
            self.bounding_box.is_some(),
            has_text(self.supported_srs),
            self.contact.is_some_and(filled) || filled(self.provider),
        ]
    }
}

fn has_text(items: &[String]) -> bool {
    items.iter().any(|s| !s.trim().is_empty())
}

pub fn completeness(view: &MetadataView<'_>) -> f64 {
    view.checklist().iter().filter(|b| **b).count() as f64 / 6.0
}

/// `2^(-median / halfLife)` over the newest [`SAMPLE_WINDOW`] samples, with
/// failures counted as [`FAILURE_HALF_LIVES`] half-lives.
pub fn latency_score(samples: &[ProbeSample], half_life_ms: f64) -> Result<f64, ScoringError> {
    if !(half_life_ms.is_finite() && half_life_ms > 0.0) {
        return Err(ScoringError::InvalidHalfLife(half_life_ms));
    }
    if samples.is_empty() {
        return Err(ScoringError::NoSamples);
    }
    let window = &samples[samples.len().saturating_sub(SAMPLE_WINDOW)..];
    let mut latencies: Vec<f64> = window
        .iter()
        .map(|s| s.latency_ms.map_or(FAILURE_HALF_LIVES * half_life_ms, |l| l as f64))
        .collect();
    latencies.sort_by(f64::total_cmp);
    let n = latencies.len();
    let median = if n % 2 == 1 {
        latencies[n / 2]
    } else {
        (latencies[n / 2 - 1] + latencies[n / 2]) / 2.0
    };
    Ok((-median / half_life_ms).exp2())
}

pub fn combine_score(
    completeness: f64,
    latency_score: f64,
    weights: ScoreWeights,
) -> Result<ScoreBreakdown, ScoringError> {
    weights.validate()?;
    let combined = weights.completeness * completeness + weights.latency * latency_score;
    Ok(ScoreBreakdown {
        completeness,
        latency_score,
        combined: combined.clamp(0.0, 1.0),
        weights,
    })
}

/// Requests a capabilities URL and turns the outcome into a sample.
/// Transport errors and HTTP error statuses become failure samples.
pub fn probe(
    service_id: ServiceId,
    url: &str,
    transport: &dyn Transport,
    clock: &dyn Clock,
    timeout: Duration,
) -> ProbeSample {
    let started = clock.now_ms();
    let result = transport.request(url, timeout);
    let elapsed = clock.now_ms().saturating_sub(started);
    let (latency_ms, http_status) = match result {
        Ok(r) if r.status < 400 => (Some(elapsed), Some(r.status)),
        Ok(r) => (None, Some(r.status)),
        Err(_) => (None, None),
    };
    ProbeSample {
        service_id,
        timestamp_ms: i64::try_from(started).unwrap_or(i64::MAX),
        latency_ms,
        http_status,
    }
}

/// Score parameters plus the catalogue-facing rescoring routine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scorer {
    pub weights: ScoreWeights,
    pub half_life_ms: f64,
}

impl Default for Scorer {
    fn default() -> Self {
        Scorer {
            weights: ScoreWeights::default(),
            half_life_ms: DEFAULT_HALF_LIFE_MS,
        }
    }
}

impl Scorer {
    pub fn new(weights: ScoreWeights, half_life_ms: f64) -> Result<Self, ScoringError> {
        weights.validate()?;
        if !(half_life_ms.is_finite() && half_life_ms > 0.0) {
            return Err(ScoringError::InvalidHalfLife(half_life_ms));
        }
        Ok(Scorer { weights, half_life_ms })
    }

    /// Recomputes and stores the service score and every layer's quality
    /// score. A service that was never probed gets a latency score of 0.
    pub fn rescore_service(&self, catalogue: &Catalogue, id: ServiceId) -> Result<ScoreBreakdown, ScoringError> {
        let service = catalogue.get_service(id)?.ok_or(CatalogueError::UnknownService(id))?;
        let layers = catalogue.layers_of_service(id)?;
        let samples = catalogue.recent_samples(id, SAMPLE_WINDOW)?;
        let latency = match latency_score(&samples, self.half_life_ms) {
            Ok(v) => v,
            Err(ScoringError::NoSamples) => 0.0,
            Err(e) => return Err(e),
        };
        let overall = combine_score(
            completeness(&MetadataView::of_service(&service, &layers)),
            latency,
            self.weights,
        )?;
        catalogue.set_service_score(id, overall.combined, samples.last().map(|s| s.timestamp_ms))?;
        for layer in &layers {
            if let Some(meta) = catalogue.layer_metadata(layer.layer_id)? {
                let c = completeness(&MetadataView::of_layer(layer, &meta, &service));
                catalogue.set_layer_quality(layer.layer_id, combine_score(c, latency, self.weights)?.combined)?;
            }
        }
        Ok(overall)
    }

    /// Probes a service, stores the sample and rescores.
    pub fn probe_and_rescore(
        &self,
        catalogue: &Catalogue,
        id: ServiceId,
        transport: &dyn Transport,
        clock: &dyn Clock,
        timeout: Duration,
    ) -> Result<(ProbeSample, ScoreBreakdown), ScoringError> {
        let service = catalogue.get_service(id)?.ok_or(CatalogueError::UnknownService(id))?;
        let sample = probe(id, &service.url, transport, clock, timeout);
        catalogue.record_probe(&sample)?;
        let breakdown = self.rescore_service(catalogue, id)?;
        Ok((sample, breakdown))
    }
}
