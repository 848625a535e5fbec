//! Keyword-based relevance filter for atmospheric science metadata.
//!
//! Text is split into maximal alphanumeric runs, lowercased, and each
//! vocabulary phrase matches only as a contiguous run of whole tokens within
//! a single text field.

use std::collections::{BTreeSet, HashMap};
use std::io::BufRead;
use std::path::Path;

use serde::Serialize;

use crate::capabilities::{LayerDraft, ServiceDraft};

/// Longest accepted phrase, in tokens.
pub const MAX_PHRASE_TOKENS: usize = 6;
pub const DEFAULT_THRESHOLD: u32 = 1;

const DEFAULT_VOCABULARY: &str = include_str!("../data/gcmd_atmosphere.txt");

#[derive(Debug, thiserror::Error)]
pub enum VocabularyError {
    #[error("vocabulary contains no terms")]
    EmptyVocabulary,
    #[error("line {line}: `{term}` must have between 1 and {MAX_PHRASE_TOKENS} words")]
    InvalidTerm { line: usize, term: String },
    #[error("cannot read vocabulary: {0}")]
    Io(#[from] std::io::Error),
}

/// Lowercase alphanumeric tokens of `text`.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone)]
pub struct Vocabulary {
    terms: BTreeSet<String>,
    source_label: String,
    /// Token sequences keyed by their first token.
    by_first: HashMap<String, Vec<(Vec<String>, String)>>,
}

impl Vocabulary {
    /// Loads one phrase per line; blank lines and `#` comments are skipped.
    pub fn load(reader: impl BufRead, source_label: impl Into<String>) -> Result<Self, VocabularyError> {
        let mut terms = BTreeSet::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let phrase = trimmed.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
            let n = tokenize(&phrase).len();
            if n == 0 || n > MAX_PHRASE_TOKENS {
                return Err(VocabularyError::InvalidTerm {
                    line: idx + 1,
                    term: trimmed.to_string(),
                });
            }
            terms.insert(phrase);
        }
        if terms.is_empty() {
            return Err(VocabularyError::EmptyVocabulary);
        }
        Ok(Self::from_terms(terms, source_label.into()))
    }

    pub fn from_lines<S: AsRef<str>>(lines: &[S], source_label: &str) -> Result<Self, VocabularyError> {
        let joined = lines.iter().map(|l| l.as_ref()).collect::<Vec<_>>().join("\n");
        Self::load(joined.as_bytes(), source_label)
    }

    pub fn from_file(path: &Path) -> Result<Self, VocabularyError> {
        let file = std::fs::File::open(path)?;
        Self::load(std::io::BufReader::new(file), path.display().to_string())
    }

    /// The bundled GCMD atmosphere subset.
    pub fn builtin() -> Self {
        Self::load(DEFAULT_VOCABULARY.as_bytes(), "builtin:gcmd-atmosphere").expect("bundled vocabulary is valid")
    }

    fn from_terms(terms: BTreeSet<String>, source_label: String) -> Self {
        let mut by_first: HashMap<String, Vec<(Vec<String>, String)>> = HashMap::new();
        for term in &terms {
            let tokens = tokenize(term);
            by_first
                .entry(tokens[0].clone())
                .or_default()
                .push((tokens, term.clone()));
        }
        Vocabulary {
            terms,
            source_label,
            by_first,
        }
    }

    pub fn terms(&self) -> &BTreeSet<String> {
        &self.terms
    }

    pub fn source_label(&self) -> &str {
        &self.source_label
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn contains(&self, phrase: &str) -> bool {
        self.terms.contains(phrase)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RelevanceVerdict {
    pub matched_terms: BTreeSet<String>,
    pub score: u32,
    pub relevant: bool,
}

/// Counts the distinct vocabulary phrases found in `texts`.
pub fn score_relevance<S: AsRef<str>>(texts: &[S], vocab: &Vocabulary, threshold: u32) -> RelevanceVerdict {
    let mut matched = BTreeSet::new();
    for text in texts {
        let tokens = tokenize(text.as_ref());
        for start in 0..tokens.len() {
            let Some(candidates) = vocab.by_first.get(&tokens[start]) else {
                continue;
            };
            for (phrase, term) in candidates {
                if tokens[start..].starts_with(phrase) {
                    matched.insert(term.clone());
                }
            }
        }
    }
    let score = u32::try_from(matched.len()).unwrap_or(u32::MAX);
    RelevanceVerdict {
        matched_terms: matched,
        score,
        relevant: score >= threshold,
    }
}

/// The text fields inspected for a service: its own title, abstract and
/// keywords plus those of every layer.
pub fn relevance_texts(service: &ServiceDraft, layers: &[LayerDraft]) -> Vec<String> {
    let mut out = vec![service.title.clone(), service.abstract_text.clone()];
    out.extend(service.keywords.iter().cloned());
    for layer in layers {
        out.push(layer.title.clone());
        out.push(layer.abstract_text.clone());
        out.extend(layer.keywords.iter().cloned());
    }
    out
}
