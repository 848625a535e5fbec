//! Helpers shared by the integration test targets.
#![allow(dead_code)]

pub mod cql_oracle;
pub mod jenks_oracle;
pub mod workflow_oracle;

use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use atmohub_core::api::{serve, AppState};
use atmohub_core::capabilities::detect_service_kind;
use atmohub_core::crawl::{
    read_seed_file, CapabilitiesSink, CrawlControl, CrawlReport, CrawlTask, Crawler, SinkOutcome,
};
use atmohub_core::{Catalogue, ManualClock, ServiceType, SimulatedWeb};
use url::Url;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(rel)
}

pub fn read_fixture(rel: &str) -> Vec<u8> {
    std::fs::read(fixture(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub const PORTAL: &str = "http://www.atmos-portal.example.org/";
pub const SST_ENDPOINT: &str = "http://sst.ocean.example.gov/geoserver/wms?request=GetCapabilities&service=WMS";
pub const WFS_ENDPOINT: &str = "http://obs.wetter.example.de/services/wfs?request=GetCapabilities&service=WFS";
pub const WCS_ENDPOINT: &str = "http://geo.terrain.example.fr/wcs?request=GetCapabilities&service=WCS";
pub const EXCEPTION_ENDPOINT: &str = "http://maps.broken.example.uk/maps/wms?request=GetCapabilities&service=WMS";

/// The simulated site, its virtual clock and a catalogue-backed state.
pub struct Site {
    pub clock: Arc<ManualClock>,
    pub web: Arc<SimulatedWeb>,
    pub state: Arc<AppState>,
}

pub fn site() -> Site {
    let clock = Arc::new(ManualClock::new(1_700_000_000_000));
    let web = Arc::new(
        SimulatedWeb::from_manifest(&fixture("web/site.toml"))
            .expect("site manifest loads")
            .with_clock(clock.clone()),
    );
    let catalogue = Arc::new(Catalogue::open_in_memory().unwrap().with_clock(clock.clone()));
    let state = AppState::new(catalogue, web.clone(), clock.clone());
    Site {
        clock,
        web,
        state: Arc::new(state),
    }
}

/// Wraps a sink and remembers the service type of every document it saw.
pub struct RecordingSink<'a> {
    pub inner: &'a dyn CapabilitiesSink,
    pub seen: Mutex<Vec<(String, ServiceType, SinkOutcome)>>,
}

impl CapabilitiesSink for RecordingSink<'_> {
    fn accept(&self, url: &Url, body: &[u8], latency_ms: u64) -> SinkOutcome {
        let outcome = self.inner.accept(url, body, latency_ms);
        let kind = detect_service_kind(body)
            .map(|(k, _)| k)
            .expect("sink only receives capabilities");
        self.seen.lock().unwrap().push((url.to_string(), kind, outcome.clone()));
        outcome
    }
}

pub struct CrawlRun {
    pub report: CrawlReport,
    pub seen: Vec<(String, ServiceType, SinkOutcome)>,
}

/// Crawls the simulated site from its seed file with one worker.
pub fn crawl_site(site: &Site, max_depth: u32, max_pages: u32, per_host_delay_ms: u64) -> CrawlRun {
    let seeds = read_seed_file(&fixture("web/seeds.txt")).unwrap();
    let mut task = CrawlTask::new("acceptance", seeds, max_depth, max_pages, per_host_delay_ms);
    let sink = RecordingSink {
        inner: &site.state.ingestor,
        seen: Mutex::new(Vec::new()),
    };
    let crawler = Crawler {
        transport: site.web.as_ref(),
        clock: site.clock.as_ref(),
        sink: &sink,
        config: &site.state.crawl,
    };
    let report = crawler.run(&mut task, &CrawlControl::default()).expect("crawl runs");
    CrawlRun {
        report,
        seen: sink.seen.into_inner().unwrap(),
    }
}

/// An API server on an ephemeral local port.
pub struct TestServer {
    pub base: String,
    runtime: Option<tokio::runtime::Runtime>,
    shutdown: Option<tokio::sync::oneshot::Sender<()>>,
    done: Option<tokio::task::JoinHandle<std::io::Result<()>>>,
}

impl TestServer {
    pub fn start(state: Arc<AppState>) -> Self {
        let runtime = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()
            .unwrap();
        let listener = runtime.block_on(tokio::net::TcpListener::bind("127.0.0.1:0")).unwrap();
        let base = format!("http://{}", listener.local_addr().unwrap());
        let (tx, rx) = tokio::sync::oneshot::channel::<()>();
        let done = runtime.spawn(serve(listener, state, async {
            let _ = rx.await;
        }));
        TestServer {
            base,
            runtime: Some(runtime),
            shutdown: Some(tx),
            done: Some(done),
        }
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{}", self.base, path)
    }

    pub fn stop(mut self) {
        self.shutdown_now();
    }

    fn shutdown_now(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let (Some(rt), Some(done)) = (self.runtime.take(), self.done.take()) {
            rt.block_on(done).unwrap().unwrap();
        }
    }
}

impl Drop for TestServer {
    fn drop(&mut self) {
        self.shutdown_now();
    }
}

pub fn agent() -> ureq::Agent {
    ureq::Agent::config_builder()
        .http_status_as_error(false)
        .timeout_global(Some(Duration::from_secs(30)))
        .build()
        .into()
}

/// GET with query pairs; returns status and body text.
pub fn get(url: &str, query: &[(&str, &str)]) -> (u16, String) {
    let mut req = agent().get(url);
    for (k, v) in query {
        req = req.query(*k, *v);
    }
    let mut resp = req.call().unwrap();
    (resp.status().as_u16(), resp.body_mut().read_to_string().unwrap())
}

pub fn get_json(url: &str, query: &[(&str, &str)]) -> (u16, serde_json::Value) {
    let (status, body) = get(url, query);
    (
        status,
        serde_json::from_str(&body).unwrap_or_else(|e| panic!("{e}: {body}")),
    )
}

pub fn send_json(method: &str, url: &str, body: &serde_json::Value, token: Option<&str>) -> (u16, serde_json::Value) {
    let agent = agent();
    let text = body.to_string();
    let mut resp = match method {
        "POST" => {
            let mut req = agent.post(url).header("content-type", "application/json");
            if let Some(t) = token {
                req = req.header("authorization", &format!("Bearer {t}"));
            }
            req.send(text.as_str()).unwrap()
        }
        "DELETE" => {
            let mut req = agent.delete(url);
            if let Some(t) = token {
                req = req.header("authorization", &format!("Bearer {t}"));
            }
            req.call().unwrap()
        }
        other => panic!("unsupported method {other}"),
    };
    let status = resp.status().as_u16();
    let text = resp.body_mut().read_to_string().unwrap();
    (
        status,
        serde_json::from_str(&text).unwrap_or(serde_json::Value::String(text)),
    )
}
