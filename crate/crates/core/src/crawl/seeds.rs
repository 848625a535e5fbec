//! Seed providers: where a crawl's starting URLs come from.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use url::Url;

use super::url::{normalize_url, MalformedUrl};

#[derive(Debug, thiserror::Error)]
pub enum SeedError {
    #[error("cannot read {0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("line {line}: {source}")]
    BadLine { line: usize, source: MalformedUrl },
    #[error("invalid seed index: {0}")]
    Index(String),
    #[error("no seeds for keywords `{0}`")]
    NoResults(String),
}

/// Turns crawl keywords into seed URLs, standing in for a web search engine.
pub trait SeedProvider: Send + Sync {
    fn seeds(&self, keywords: &[String]) -> Result<Vec<Url>, SeedError>;
}

/// Parses a seed file: one absolute URL per line, `#` starts a comment.
pub fn parse_seed_lines(text: &str) -> Result<Vec<Url>, SeedError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let url = normalize_url(line).map_err(|source| SeedError::BadLine { line: i + 1, source })?;
        if !out.contains(&url) {
            out.push(url);
        }
    }
    Ok(out)
}

pub fn read_seed_file(path: &Path) -> Result<Vec<Url>, SeedError> {
    let text = std::fs::read_to_string(path).map_err(|e| SeedError::Io(path.to_path_buf(), e))?;
    parse_seed_lines(&text)
}

/// Serves the same seed file for any keywords.
pub struct SeedFile {
    path: PathBuf,
}

impl SeedFile {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        SeedFile { path: path.into() }
    }
}

impl SeedProvider for SeedFile {
    fn seeds(&self, _keywords: &[String]) -> Result<Vec<Url>, SeedError> {
        read_seed_file(&self.path)
    }
}

/// Canned search results keyed by the lowercased, space-joined query.
///
/// TOML form:
/// ```toml
/// [queries]
/// "world sst" = ["http://portal.example/", "http://maps.example/"]
/// ```
#[derive(Debug, Default, Clone)]
pub struct CannedSearch {
    queries: BTreeMap<String, Vec<Url>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CannedIndex {
    queries: BTreeMap<String, Vec<String>>,
}

impl CannedSearch {
    pub fn new() -> Self {
        CannedSearch::default()
    }

    pub fn with(mut self, query: &str, urls: &[&str]) -> Self {
        let urls = urls.iter().filter_map(|u| normalize_url(u).ok()).collect();
        self.queries.insert(query_key(&[query.to_string()]), urls);
        self
    }

    pub fn from_toml(text: &str) -> Result<Self, SeedError> {
        let index: CannedIndex = toml::from_str(text).map_err(|e| SeedError::Index(e.to_string()))?;
        let mut queries = BTreeMap::new();
        for (query, urls) in index.queries {
            let urls = urls
                .iter()
                .enumerate()
                .map(|(i, u)| normalize_url(u).map_err(|source| SeedError::BadLine { line: i + 1, source }))
                .collect::<Result<Vec<_>, _>>()?;
            queries.insert(query_key(&[query]), urls);
        }
        Ok(CannedSearch { queries })
    }

    pub fn load(path: &Path) -> Result<Self, SeedError> {
        let text = std::fs::read_to_string(path).map_err(|e| SeedError::Io(path.to_path_buf(), e))?;
        Self::from_toml(&text)
    }
}

impl SeedProvider for CannedSearch {
    fn seeds(&self, keywords: &[String]) -> Result<Vec<Url>, SeedError> {
        let key = query_key(keywords);
        match self.queries.get(&key) {
            Some(urls) if !urls.is_empty() => Ok(urls.clone()),
            _ => Err(SeedError::NoResults(key)),
        }
    }
}

fn query_key(keywords: &[String]) -> String {
    keywords
        .iter()
        .flat_map(|k| k.split_whitespace())
        .map(|w| w.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lines_skip_comments_and_blanks() {
        let seeds = parse_seed_lines("# header\n\nhttp://A/x  # trailing\nhttp://a/x\nhttps://b/\n").unwrap();
        let seeds: Vec<String> = seeds.into_iter().map(String::from).collect();
        assert_eq!(seeds, ["http://a/x", "https://b/"]);
        assert!(matches!(
            parse_seed_lines("nope"),
            Err(SeedError::BadLine { line: 1, .. })
        ));
    }

    #[test]
    fn canned_search_is_case_and_space_insensitive() {
        let idx = CannedSearch::from_toml("[queries]\n\"World SST\" = [\"http://p/\"]\n").unwrap();
        assert_eq!(idx.seeds(&["world".into(), "sst".into()]).unwrap().len(), 1);
        assert!(matches!(idx.seeds(&["mars".into()]), Err(SeedError::NoResults(_))));
    }
}
