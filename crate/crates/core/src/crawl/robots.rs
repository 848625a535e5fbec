use std::collections::HashMap;

use robotstxt::DefaultMatcher;
use url::Url;

/// robots.txt bodies cached per host. A host whose robots.txt could not be
/// fetched (or answered non-2xx) allows everything.
#[derive(Debug, Default)]
pub struct RobotsCache {
    rules: HashMap<String, Option<String>>,
}

impl RobotsCache {
    pub fn new() -> Self {
        RobotsCache::default()
    }

    pub fn is_cached(&self, host: &str) -> bool {
        self.rules.contains_key(host)
    }

    pub fn insert(&mut self, host: &str, body: Option<String>) {
        self.rules.insert(host.to_string(), body);
    }

    pub fn allowed(&self, host: &str, user_agent: &str, url: &Url) -> bool {
        match self.rules.get(host) {
            Some(Some(body)) => DefaultMatcher::default().one_agent_allowed_by_robots(body, user_agent, url.as_str()),
            _ => true,
        }
    }
}

pub fn robots_url(url: &Url) -> Option<Url> {
    url.join("/robots.txt").ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disallow_rules_apply() {
        let mut cache = RobotsCache::new();
        cache.insert("h", Some("User-agent: *\nDisallow: /private/\n".into()));
        let ok = Url::parse("http://h/public/a").unwrap();
        let no = Url::parse("http://h/private/a").unwrap();
        assert!(cache.allowed("h", "atmohub", &ok));
        assert!(!cache.allowed("h", "atmohub", &no));
        cache.insert("g", None);
        assert!(cache.allowed("g", "atmohub", &no));
        assert!(cache.allowed("unknown", "atmohub", &no));
    }
}
