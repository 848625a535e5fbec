use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use serde::Serialize;

use crate::crawl::{CrawlControl, CrawlReport, CrawlSpec, TaskState};

/// Snapshot of a background crawl.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TaskStatus {
    pub task_id: String,
    pub state: TaskState,
    pub spec: CrawlSpec,
    pub report: CrawlReport,
}

struct TaskEntry {
    spec: CrawlSpec,
    control: Arc<CrawlControl>,
    thread: Option<JoinHandle<()>>,
}

/// Background crawls by task id.
#[derive(Default)]
pub struct TaskRegistry {
    tasks: Mutex<HashMap<String, TaskEntry>>,
}

impl TaskRegistry {
    pub fn new() -> Self {
        TaskRegistry::default()
    }

    pub fn insert(&self, task_id: &str, spec: CrawlSpec, control: Arc<CrawlControl>, thread: JoinHandle<()>) {
        self.tasks.lock().expect("task registry poisoned").insert(
            task_id.to_string(),
            TaskEntry {
                spec,
                control,
                thread: Some(thread),
            },
        );
    }

    pub fn status(&self, task_id: &str) -> Option<TaskStatus> {
        let tasks = self.tasks.lock().expect("task registry poisoned");
        tasks.get(task_id).map(|t| TaskStatus {
            task_id: task_id.to_string(),
            state: t.control.state(),
            spec: t.spec.clone(),
            report: t.control.report(),
        })
    }

    /// Cancels a task and waits for its worker to stop. Finished tasks are
    /// left as they are.
    pub fn cancel(&self, task_id: &str) -> Option<TaskStatus> {
        let thread = {
            let mut tasks = self.tasks.lock().expect("task registry poisoned");
            let task = tasks.get_mut(task_id)?;
            if task.control.state().is_terminal() {
                None
            } else {
                task.control.cancel();
                task.thread.take()
            }
        };
        if let Some(handle) = thread {
            if handle.join().is_err() {
                tracing::error!(task = task_id, "crawl worker panicked");
            }
        }
        self.status(task_id)
    }

    /// Waits for a task to finish on its own.
    pub fn wait(&self, task_id: &str) -> Option<TaskStatus> {
        let thread = self
            .tasks
            .lock()
            .expect("task registry poisoned")
            .get_mut(task_id)?
            .thread
            .take();
        if let Some(handle) = thread {
            let _ = handle.join();
        }
        self.status(task_id)
    }

    pub fn ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self
            .tasks
            .lock()
            .expect("task registry poisoned")
            .keys()
            .cloned()
            .collect();
        ids.sort();
        ids
    }
}
