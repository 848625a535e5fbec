use serde::{Deserialize, Serialize};
use url::Url;

use super::frontier::{Frontier, FrontierEntry};
use super::CrawlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TaskState {
    Pending,
    Running,
    Done,
    Aborted,
}

impl TaskState {
    pub fn is_terminal(self) -> bool {
        matches!(self, TaskState::Done | TaskState::Aborted)
    }
}

pub const DEFAULT_PER_HOST_DELAY_MS: u64 = 1000;

/// Parameters of a crawl, as accepted from operators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CrawlSpec {
    #[serde(default)]
    pub keywords: Vec<String>,
    #[serde(default)]
    pub seed_urls: Vec<String>,
    #[serde(default = "default_max_depth")]
    pub max_depth: u32,
    #[serde(default = "default_max_pages")]
    pub max_pages: u32,
    #[serde(default = "default_delay")]
    pub per_host_delay_ms: u64,
}

fn default_max_depth() -> u32 {
    3
}
fn default_max_pages() -> u32 {
    500
}
fn default_delay() -> u64 {
    DEFAULT_PER_HOST_DELAY_MS
}

impl Default for CrawlSpec {
    fn default() -> Self {
        CrawlSpec {
            keywords: Vec::new(),
            seed_urls: Vec::new(),
            max_depth: default_max_depth(),
            max_pages: default_max_pages(),
            per_host_delay_ms: default_delay(),
        }
    }
}

/// One crawl: its budget, its state machine and its private frontier.
#[derive(Debug, Clone)]
pub struct CrawlTask {
    pub task_id: String,
    pub keywords: Vec<String>,
    pub seed_urls: Vec<Url>,
    pub max_depth: u32,
    pub max_pages: u32,
    pub per_host_delay_ms: u64,
    state: TaskState,
    frontier: Frontier,
}

impl CrawlTask {
    pub fn new(
        task_id: impl Into<String>,
        seed_urls: Vec<Url>,
        max_depth: u32,
        max_pages: u32,
        per_host_delay_ms: u64,
    ) -> Self {
        CrawlTask {
            task_id: task_id.into(),
            keywords: Vec::new(),
            seed_urls,
            max_depth,
            max_pages: max_pages.max(1),
            per_host_delay_ms,
            state: TaskState::Pending,
            frontier: Frontier::new(max_depth, per_host_delay_ms),
        }
    }

    pub fn with_keywords(mut self, keywords: Vec<String>) -> Self {
        self.keywords = keywords;
        self
    }

    pub fn state(&self) -> TaskState {
        self.state
    }

    /// Pending → Running, seeding the frontier at depth 0.
    pub fn start(&mut self) -> Result<(), CrawlError> {
        if self.state != TaskState::Pending {
            return Err(CrawlError::InvalidTransition {
                from: self.state,
                to: TaskState::Running,
            });
        }
        if self.seed_urls.is_empty() {
            return Err(CrawlError::NoSeeds);
        }
        self.state = TaskState::Running;
        for seed in self.seed_urls.clone() {
            self.frontier.push(FrontierEntry::new(seed, 0));
        }
        Ok(())
    }

    pub fn finish(&mut self) {
        if self.state == TaskState::Running {
            self.state = TaskState::Done;
        }
    }

    pub fn abort(&mut self) {
        if !self.state.is_terminal() {
            self.state = TaskState::Aborted;
        }
    }

    pub fn frontier_push(&mut self, entry: FrontierEntry) -> Result<bool, CrawlError> {
        if self.state != TaskState::Running {
            return Err(CrawlError::TaskNotRunning(self.state));
        }
        Ok(self.frontier.push(entry))
    }

    pub fn frontier_pop(&mut self, now_ms: u64) -> Option<FrontierEntry> {
        if self.state != TaskState::Running {
            return None;
        }
        self.frontier.pop(now_ms)
    }

    pub fn frontier(&self) -> &Frontier {
        &self.frontier
    }

    pub(crate) fn frontier_mut(&mut self) -> &mut Frontier {
        &mut self.frontier
    }
}
