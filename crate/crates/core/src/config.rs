//! Service configuration: a TOML file with `ATMOHUB_*` environment
//! overrides. Every field has a default, so an empty file is valid.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::scoring::{ScoreWeights, DEFAULT_HALF_LIFE_MS};
use crate::semantic::DEFAULT_THRESHOLD;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("environment variable {name}: {reason}")]
    Env { name: String, reason: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub listen: String,
    /// Bearer token for mutating routes; `None` leaves them open.
    pub api_token: Option<String>,
    /// SQLite file; `None` keeps the catalogue in memory.
    pub store_path: Option<PathBuf>,
    /// Vocabulary file; `None` uses the bundled list.
    pub vocabulary_path: Option<PathBuf>,
    pub relevance_threshold: u32,
    pub weights: ScoreWeights,
    pub half_life_ms: f64,
    pub crawl: CrawlSettings,
    pub catalogue: CatalogueInfo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrawlSettings {
    pub max_depth: u32,
    pub max_pages: u32,
    pub per_host_delay_ms: u64,
    pub respect_robots: bool,
    pub user_agent: String,
    pub workers: usize,
    pub fetch_timeout_ms: u64,
    /// TOML table of canned keyword searches used to turn keywords into seeds.
    pub seed_index: Option<PathBuf>,
    /// Serve fetches from a simulated site manifest instead of the network.
    pub simulated_site: Option<PathBuf>,
}

/// Metadata advertised in the CSW capabilities document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CatalogueInfo {
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub provider: String,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            listen: "127.0.0.1:8080".to_string(),
            api_token: None,
            store_path: None,
            vocabulary_path: None,
            relevance_threshold: DEFAULT_THRESHOLD,
            weights: ScoreWeights::default(),
            half_life_ms: DEFAULT_HALF_LIFE_MS,
            crawl: CrawlSettings::default(),
            catalogue: CatalogueInfo::default(),
        }
    }
}

impl Default for CrawlSettings {
    fn default() -> Self {
        CrawlSettings {
            max_depth: 3,
            max_pages: 500,
            per_host_delay_ms: crate::crawl::DEFAULT_PER_HOST_DELAY_MS,
            respect_robots: true,
            user_agent: "atmohub".to_string(),
            workers: 1,
            fetch_timeout_ms: 10_000,
            seed_index: None,
            simulated_site: None,
        }
    }
}

impl Default for CatalogueInfo {
    fn default() -> Self {
        CatalogueInfo {
            title: "Atmospheric data catalogue".to_string(),
            abstract_text: "Harvested OGC services carrying atmospheric science data".to_string(),
            provider: String::new(),
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: Config = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Reads `path`, resolving relative paths inside it against the file's
    /// directory, then applies environment overrides.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = Self::from_toml(&text)?;
        if let Some(dir) = path.parent() {
            config.resolve_paths(dir);
        }
        config.apply_env(|name| std::env::var(name).ok())?;
        Ok(config)
    }

    fn resolve_paths(&mut self, dir: &Path) {
        for p in [
            &mut self.store_path,
            &mut self.vocabulary_path,
            &mut self.crawl.seed_index,
            &mut self.crawl.simulated_site,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
    }

    /// Applies overrides from `lookup`, which maps a variable name to its
    /// value. Recognised: `ATMOHUB_LISTEN`, `ATMOHUB_API_TOKEN`,
    /// `ATMOHUB_STORE`, `ATMOHUB_VOCABULARY`, `ATMOHUB_WEIGHT_COMPLETENESS`,
    /// `ATMOHUB_WEIGHT_LATENCY`.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        if let Some(v) = lookup("ATMOHUB_LISTEN") {
            self.listen = v;
        }
        if let Some(v) = lookup("ATMOHUB_API_TOKEN") {
            self.api_token = Some(v).filter(|t| !t.is_empty());
        }
        if let Some(v) = lookup("ATMOHUB_STORE") {
            self.store_path = Some(PathBuf::from(v));
        }
        if let Some(v) = lookup("ATMOHUB_VOCABULARY") {
            self.vocabulary_path = Some(PathBuf::from(v));
        }
        let number = |name: &str| -> Result<Option<f64>, ConfigError> {
            lookup(name)
                .map(|v| {
                    v.trim().parse::<f64>().map_err(|e| ConfigError::Env {
                        name: name.to_string(),
                        reason: e.to_string(),
                    })
                })
                .transpose()
        };
        if let Some(w) = number("ATMOHUB_WEIGHT_COMPLETENESS")? {
            self.weights.completeness = w;
        }
        if let Some(w) = number("ATMOHUB_WEIGHT_LATENCY")? {
            self.weights.latency = w;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.weights
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if !(self.half_life_ms.is_finite() && self.half_life_ms > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "half_life_ms must be positive, got {}",
                self.half_life_ms
            )));
        }
        if self.listen.parse::<std::net::SocketAddr>().is_err() {
            return Err(ConfigError::Invalid(format!(
                "listen address `{}` is not host:port",
                self.listen
            )));
        }
        Ok(())
    }
}
