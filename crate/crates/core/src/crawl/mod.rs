//! Focused crawler: seed pool, polite fetching, HTML vs. capabilities
//! triage, link extraction and OWS endpoint probing.

mod classify;
mod engine;
mod frontier;
mod links;
mod probes;
mod robots;
mod seeds;
mod task;
pub(crate) mod url;

pub use self::classify::{classify_response, DocKind, SNIFF_WINDOW};
pub use self::engine::{
    run_crawl, CapabilitiesSink, CrawlConfig, CrawlControl, CrawlErrorEntry, CrawlReport, Crawler, FetchErrorKind,
    SinkOutcome,
};
pub use self::frontier::{EntryKind, Frontier, FrontierEntry};
pub use self::links::extract_links;
pub use self::probes::{derive_ows_probes, endpoint_key, ProbeConfigError, ProbePattern, ProbePatterns};
pub use self::robots::RobotsCache;
pub use self::seeds::{parse_seed_lines, read_seed_file, CannedSearch, SeedError, SeedFile, SeedProvider};
pub use self::task::{CrawlSpec, CrawlTask, TaskState, DEFAULT_PER_HOST_DELAY_MS};
pub use self::url::{host_key, normalize_url, resolve_url, MalformedUrl};

#[derive(Debug, thiserror::Error)]
pub enum CrawlError {
    #[error("task is not running (state {0:?})")]
    TaskNotRunning(TaskState),
    #[error("cannot move task from {from:?} to {to:?}")]
    InvalidTransition { from: TaskState, to: TaskState },
    #[error("task has no seed URLs")]
    NoSeeds,
}
