use std::collections::{BTreeMap, HashMap, HashSet};

use url::Url;

use super::url::host_key;

/// Why a URL entered the frontier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryKind {
    /// Seed or hyperlink found on a page.
    Link,
    /// GetCapabilities request derived from a link.
    Probe,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrontierEntry {
    pub url: Url,
    pub depth: u32,
    pub discovered_from: Option<Url>,
    pub kind: EntryKind,
    seq: u64,
}

impl FrontierEntry {
    pub fn new(url: Url, depth: u32) -> Self {
        FrontierEntry {
            url,
            depth,
            discovered_from: None,
            kind: EntryKind::Link,
            seq: 0,
        }
    }

    pub fn from_parent(url: Url, depth: u32, parent: &Url, kind: EntryKind) -> Self {
        FrontierEntry {
            url,
            depth,
            discovered_from: Some(parent.clone()),
            kind,
            seq: 0,
        }
    }

    pub fn probe(mut self) -> Self {
        self.kind = EntryKind::Probe;
        self
    }

    pub fn host(&self) -> String {
        host_key(&self.url)
    }
}

/// Seed pool with dedup, depth bound and per-host politeness.
///
/// Ordering is lowest depth first, then insertion order. A pop only returns
/// an entry whose host was last fetched at least `per_host_delay_ms` ago and
/// stamps that host as fetched at the pop time.
#[derive(Debug, Clone)]
pub struct Frontier {
    max_depth: u32,
    per_host_delay_ms: u64,
    seen: HashSet<String>,
    queue: BTreeMap<(u32, u64), FrontierEntry>,
    next_seq: u64,
    last_fetch: HashMap<String, u64>,
}

impl Frontier {
    pub fn new(max_depth: u32, per_host_delay_ms: u64) -> Self {
        Frontier {
            max_depth,
            per_host_delay_ms,
            seen: HashSet::new(),
            queue: BTreeMap::new(),
            next_seq: 0,
            last_fetch: HashMap::new(),
        }
    }

    /// Returns true iff the URL is new to this frontier and within depth.
    pub fn push(&mut self, mut entry: FrontierEntry) -> bool {
        if entry.depth > self.max_depth {
            return false;
        }
        if !self.seen.insert(entry.url.as_str().to_string()) {
            return false;
        }
        entry.seq = self.next_seq;
        self.next_seq += 1;
        self.queue.insert((entry.depth, entry.seq), entry);
        true
    }

    /// Puts a popped entry back at its original position, bypassing dedup.
    pub fn requeue(&mut self, entry: FrontierEntry) {
        self.queue.insert((entry.depth, entry.seq), entry);
    }

    pub fn pop(&mut self, now_ms: u64) -> Option<FrontierEntry> {
        let key = self
            .queue
            .iter()
            .find(|(_, e)| self.host_ready_at(&e.host()) <= now_ms)
            .map(|(k, _)| *k)?;
        let entry = self.queue.remove(&key)?;
        self.last_fetch.insert(entry.host(), now_ms);
        Some(entry)
    }

    /// Records an out-of-band fetch (robots.txt, retries) against a host.
    pub fn mark_fetched(&mut self, host: &str, now_ms: u64) {
        self.last_fetch.insert(host.to_string(), now_ms);
    }

    pub fn host_ready_at(&self, host: &str) -> u64 {
        self.last_fetch
            .get(host)
            .map(|t| t.saturating_add(self.per_host_delay_ms))
            .unwrap_or(0)
    }

    /// Earliest time at which some queued entry becomes eligible.
    pub fn next_ready_at(&self) -> Option<u64> {
        self.queue.values().map(|e| self.host_ready_at(&e.host())).min()
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn has_seen(&self, url: &Url) -> bool {
        self.seen.contains(url.as_str())
    }

    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    pub fn per_host_delay_ms(&self) -> u64 {
        self.per_host_delay_ms
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crawl::normalize_url;

    fn entry(url: &str, depth: u32) -> FrontierEntry {
        FrontierEntry::new(normalize_url(url).unwrap(), depth)
    }

    #[test]
    fn dedup_and_depth_bound() {
        let mut f = Frontier::new(2, 0);
        assert!(f.push(entry("http://a/x", 0)));
        assert!(!f.push(entry("http://a/x", 1)));
        assert!(!f.push(entry("http://a/y", 3)));
        assert!(f.push(entry("http://a/y", 2)));
    }

    #[test]
    fn politeness_blocks_same_host() {
        let mut f = Frontier::new(5, 1000);
        f.push(entry("http://a/1", 0));
        f.push(entry("http://a/2", 0));
        assert!(f.pop(0).is_some());
        assert!(f.pop(500).is_none());
        assert_eq!(f.next_ready_at(), Some(1000));
        assert_eq!(f.pop(1000).unwrap().url.as_str(), "http://a/2");
    }

    #[test]
    fn lower_depth_first() {
        let mut f = Frontier::new(5, 0);
        f.push(entry("http://a/deep", 2));
        f.push(entry("http://b/shallow", 0));
        assert_eq!(f.pop(0).unwrap().depth, 0);
    }

    #[test]
    fn interleaved_hosts() {
        let mut f = Frontier::new(5, 1000);
        f.push(entry("http://a/1", 0));
        f.push(entry("http://b/1", 0));
        f.push(entry("http://a/2", 0));
        assert_eq!(f.pop(0).unwrap().url.as_str(), "http://a/1");
        assert_eq!(f.pop(0).unwrap().url.as_str(), "http://b/1");
        assert!(f.pop(0).is_none());
        assert!(f.pop(999).is_none());
        assert_eq!(f.pop(1000).unwrap().url.as_str(), "http://a/2");
    }

    #[test]
    fn requeue_keeps_position() {
        let mut f = Frontier::new(5, 0);
        f.push(entry("http://a/1", 0));
        f.push(entry("http://b/1", 0));
        let first = f.pop(0).unwrap();
        f.requeue(first.clone());
        assert_eq!(f.pop(0).unwrap(), first);
    }
}
