use std::collections::HashSet;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::Serialize;
use url::Url;

use super::classify::{classify_response, DocKind};
use super::frontier::{EntryKind, FrontierEntry};
use super::links::extract_links;
use super::probes::{derive_ows_probes, endpoint_key, ProbePatterns};
use super::robots::{robots_url, RobotsCache};
use super::task::{CrawlTask, TaskState};
use super::url::host_key;
use super::CrawlError;
use crate::clock::Clock;
use crate::transport::{HttpResponse, Transport, TransportError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "detail", rename_all = "camelCase")]
pub enum FetchErrorKind {
    Transport(String),
    HttpStatus(u16),
    OwsException,
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrawlErrorEntry {
    pub url: String,
    pub error: FetchErrorKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CrawlReport {
    pub pages_visited: u32,
    pub capabilities_found: u32,
    pub services_ingested: u32,
    pub services_rejected_by_semantics: u32,
    pub errors: Vec<CrawlErrorEntry>,
}

/// What the downstream pipeline made of a capabilities document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SinkOutcome {
    Ingested,
    Rejected,
    Failed(String),
}

/// Receives every capabilities document found by a crawl.
pub trait CapabilitiesSink: Send + Sync {
    fn accept(&self, url: &Url, body: &[u8], latency_ms: u64) -> SinkOutcome;
}

#[derive(Debug, Clone)]
pub struct CrawlConfig {
    pub probe_patterns: ProbePatterns,
    pub respect_robots: bool,
    pub user_agent: String,
    pub fetch_timeout: Duration,
    /// Concurrent fetch workers; 1 gives a deterministic crawl.
    pub workers: usize,
}

impl Default for CrawlConfig {
    fn default() -> Self {
        CrawlConfig {
            probe_patterns: ProbePatterns::default(),
            respect_robots: true,
            user_agent: "atmohub".to_string(),
            fetch_timeout: Duration::from_secs(10),
            workers: 1,
        }
    }
}

/// Shared view of a running crawl: live counters, state and cancellation.
#[derive(Debug)]
pub struct CrawlControl {
    cancel: AtomicBool,
    state: Mutex<TaskState>,
    report: Mutex<CrawlReport>,
}

impl Default for CrawlControl {
    fn default() -> Self {
        CrawlControl {
            cancel: AtomicBool::new(false),
            state: Mutex::new(TaskState::Pending),
            report: Mutex::new(CrawlReport::default()),
        }
    }
}

impl CrawlControl {
    pub fn cancel(&self) {
        self.cancel.store(true, Ordering::SeqCst);
    }

    pub fn is_cancelled(&self) -> bool {
        self.cancel.load(Ordering::SeqCst)
    }

    pub fn state(&self) -> TaskState {
        *self.state.lock().expect("crawl state poisoned")
    }

    pub fn report(&self) -> CrawlReport {
        self.report.lock().expect("crawl report poisoned").clone()
    }

    fn set_state(&self, state: TaskState) {
        *self.state.lock().expect("crawl state poisoned") = state;
    }

    fn update(&self, f: impl FnOnce(&mut CrawlReport)) {
        f(&mut self.report.lock().expect("crawl report poisoned"));
    }
}

struct Shared<'t> {
    task: &'t mut CrawlTask,
    robots: RobotsCache,
    resolved_endpoints: HashSet<String>,
    in_flight: usize,
    visited: u32,
}

enum Job {
    Fetch(FrontierEntry),
    Robots(FrontierEntry),
    Wait(u64),
    Stop,
}

pub struct Crawler<'a> {
    pub transport: &'a dyn Transport,
    pub clock: &'a dyn Clock,
    pub sink: &'a dyn CapabilitiesSink,
    pub config: &'a CrawlConfig,
}

impl<'a> Crawler<'a> {
    /// Runs `task` to completion (or cancellation). Per-URL failures are
    /// recorded in the report and never end the task.
    pub fn run(&self, task: &mut CrawlTask, control: &CrawlControl) -> Result<CrawlReport, CrawlError> {
        task.start()?;
        control.set_state(TaskState::Running);
        for seed in task.seed_urls.clone() {
            for probe in derive_ows_probes(&seed, &self.config.probe_patterns) {
                task.frontier_push(FrontierEntry::from_parent(probe, 0, &seed, EntryKind::Probe))?;
            }
        }

        let shared = Mutex::new(Shared {
            task,
            robots: RobotsCache::new(),
            resolved_endpoints: HashSet::new(),
            in_flight: 0,
            visited: 0,
        });
        let workers = self.config.workers.max(1);
        if workers == 1 {
            self.worker(&shared, control);
        } else {
            std::thread::scope(|scope| {
                for _ in 0..workers {
                    scope.spawn(|| self.worker(&shared, control));
                }
            });
        }

        let shared = shared.into_inner().expect("crawl state poisoned");
        if control.is_cancelled() {
            shared.task.abort();
        } else {
            shared.task.finish();
        }
        control.set_state(shared.task.state());
        Ok(control.report())
    }

    fn worker(&self, shared: &Mutex<Shared<'_>>, control: &CrawlControl) {
        loop {
            if control.is_cancelled() {
                return;
            }
            let job = self.next_job(shared, control);
            match job {
                Job::Stop => return,
                Job::Wait(ms) => {
                    let ms = if self.config.workers > 1 {
                        ms.clamp(1, 50)
                    } else {
                        ms.max(1)
                    };
                    self.clock.sleep_ms(ms);
                }
                Job::Robots(entry) => {
                    let host = entry.host();
                    let body = robots_url(&entry.url)
                        .and_then(|u| self.transport.request(u.as_str(), self.config.fetch_timeout).ok())
                        .filter(HttpResponse::is_success)
                        .map(|r| String::from_utf8_lossy(&r.body).into_owned());
                    let mut s = shared.lock().expect("crawl state poisoned");
                    s.robots.insert(&host, body);
                    s.task.frontier_mut().requeue(entry);
                    s.in_flight -= 1;
                }
                Job::Fetch(entry) => {
                    let discovered = self.process(&entry, shared, control);
                    let mut s = shared.lock().expect("crawl state poisoned");
                    for e in discovered {
                        // The task is Running for the whole loop; a push can only fail after it ends.
                        let _ = s.task.frontier_push(e);
                    }
                    s.in_flight -= 1;
                }
            }
        }
    }

    fn next_job(&self, shared: &Mutex<Shared<'_>>, control: &CrawlControl) -> Job {
        let mut s = shared.lock().expect("crawl state poisoned");
        loop {
            if s.visited >= s.task.max_pages {
                return Job::Stop;
            }
            let now = self.clock.now_ms();
            let Some(entry) = s.task.frontier_pop(now) else {
                if s.task.frontier().is_empty() {
                    return if s.in_flight == 0 { Job::Stop } else { Job::Wait(1) };
                }
                let ready = s.task.frontier().next_ready_at().unwrap_or(now + 1);
                return Job::Wait(ready.saturating_sub(now));
            };
            if entry.kind == EntryKind::Probe && s.resolved_endpoints.contains(&endpoint_key(&entry.url)) {
                continue;
            }
            let host = entry.host();
            if self.config.respect_robots {
                if !s.robots.is_cached(&host) {
                    s.in_flight += 1;
                    return Job::Robots(entry);
                }
                if !s.robots.allowed(&host, &self.config.user_agent, &entry.url) {
                    continue;
                }
            }
            s.in_flight += 1;
            s.visited += 1;
            control.update(|r| r.pages_visited = s.visited);
            return Job::Fetch(entry);
        }
    }

    fn fetch(&self, entry: &FrontierEntry, shared: &Mutex<Shared<'_>>) -> (Result<HttpResponse, TransportError>, u64) {
        let started = self.clock.now_ms();
        let first = self.transport.request(entry.url.as_str(), self.config.fetch_timeout);
        match first {
            Err(e) if e.is_transient() => {
                let delay = shared.lock().expect("crawl state poisoned").task.per_host_delay_ms;
                self.clock.sleep_ms(delay);
                let retry_at = self.clock.now_ms();
                shared
                    .lock()
                    .expect("crawl state poisoned")
                    .task
                    .frontier_mut()
                    .mark_fetched(&host_key(&entry.url), retry_at);
                let second = self.transport.request(entry.url.as_str(), self.config.fetch_timeout);
                (second, self.clock.now_ms().saturating_sub(retry_at))
            }
            other => (other, self.clock.now_ms().saturating_sub(started)),
        }
    }

    fn process(&self, entry: &FrontierEntry, shared: &Mutex<Shared<'_>>, control: &CrawlControl) -> Vec<FrontierEntry> {
        let record = |error: FetchErrorKind| {
            control.update(|r| {
                r.errors.push(CrawlErrorEntry {
                    url: entry.url.to_string(),
                    error,
                })
            })
        };
        let (result, latency) = self.fetch(entry, shared);
        let response = match result {
            Ok(r) => r,
            Err(e) => {
                record(FetchErrorKind::Transport(e.to_string()));
                return Vec::new();
            }
        };
        if !response.is_success() {
            // A probe that misses is an expected negative, not an error.
            if entry.kind == EntryKind::Link {
                record(FetchErrorKind::HttpStatus(response.status));
            }
            return Vec::new();
        }

        match classify_response(response.content_type(), &response.body) {
            DocKind::Html if entry.kind == EntryKind::Link => self.follow_links(entry, &response.body),
            DocKind::Html | DocKind::Other => Vec::new(),
            DocKind::OwsCapabilities => {
                if !self.claim_endpoint(entry, shared) {
                    return Vec::new();
                }
                control.update(|r| r.capabilities_found += 1);
                match self.sink.accept(&entry.url, &response.body, latency) {
                    SinkOutcome::Ingested => control.update(|r| r.services_ingested += 1),
                    SinkOutcome::Rejected => control.update(|r| r.services_rejected_by_semantics += 1),
                    SinkOutcome::Failed(msg) => record(FetchErrorKind::Parse(msg)),
                }
                Vec::new()
            }
            DocKind::OwsException => {
                if self.claim_endpoint(entry, shared) {
                    record(FetchErrorKind::OwsException);
                }
                Vec::new()
            }
        }
    }

    /// First document from an endpoint wins; later probes of it are ignored.
    fn claim_endpoint(&self, entry: &FrontierEntry, shared: &Mutex<Shared<'_>>) -> bool {
        let key = endpoint_key(&entry.url);
        shared
            .lock()
            .expect("crawl state poisoned")
            .resolved_endpoints
            .insert(key)
    }

    fn follow_links(&self, entry: &FrontierEntry, body: &[u8]) -> Vec<FrontierEntry> {
        let depth = entry.depth + 1;
        let mut out = Vec::new();
        for link in extract_links(body, &entry.url) {
            let probes = derive_ows_probes(&link, &self.config.probe_patterns);
            out.push(FrontierEntry::from_parent(
                link.clone(),
                depth,
                &entry.url,
                EntryKind::Link,
            ));
            for probe in probes.into_iter().filter(|p| *p != link) {
                out.push(FrontierEntry::from_parent(probe, depth, &link, EntryKind::Probe));
            }
        }
        out
    }
}

/// Convenience wrapper over [`Crawler::run`].
pub fn run_crawl(
    task: &mut CrawlTask,
    transport: &dyn Transport,
    clock: &dyn Clock,
    sink: &dyn CapabilitiesSink,
    config: &CrawlConfig,
    control: &CrawlControl,
) -> Result<CrawlReport, CrawlError> {
    Crawler {
        transport,
        clock,
        sink,
        config,
    }
    .run(task, control)
}
