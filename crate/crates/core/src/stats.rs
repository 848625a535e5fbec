//! Catalogue statistics: services per country with natural-breaks classes,
//! and provider rankings.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use url::Url;

use crate::catalogue::{Catalogue, CatalogueError, ServiceRecord};

/// Number of classes used for the country map.
pub const DEFAULT_CLASSES: usize = 6;
/// Classes counted from the top that get a label.
pub const LABELED_TOP_CLASSES: usize = 3;

/// Relative tolerance under which two partition costs count as equal.
const COST_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("no values to classify")]
    EmptyInput,
    #[error("k = {k} is invalid for {distinct} distinct values")]
    InvalidK { k: usize, distinct: usize },
    #[error("n must be at least 1")]
    InvalidN,
    #[error("values must be finite")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountryCount {
    pub country: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProviderCount {
    pub provider: String,
    pub count: u64,
}

/// A partition of sorted values into `k` contiguous classes.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Classification {
    pub k: usize,
    /// Maximum value of every class except the last, ascending.
    pub breaks: Vec<f64>,
    /// Index into `sorted` where each class after the first begins.
    pub break_indices: Vec<usize>,
    pub sorted: Vec<f64>,
    /// Total within-class sum of squared deviations.
    pub ssd: f64,
}

impl Classification {
    /// 1-based class of `value`.
    pub fn class_of(&self, value: f64) -> usize {
        1 + self.breaks.iter().filter(|b| value > **b).count()
    }

    /// The classes as slices of the sorted values.
    pub fn classes(&self) -> Vec<&[f64]> {
        let mut bounds = vec![0];
        bounds.extend(&self.break_indices);
        bounds.push(self.sorted.len());
        bounds.windows(2).map(|w| &self.sorted[w[0]..w[1]]).collect()
    }

    /// Goodness of variance fit, 1 − SSD / SDAM. A constant array scores 1.
    pub fn gvf(&self) -> f64 {
        let total = ssd(&self.sorted);
        if total <= 0.0 {
            1.0
        } else {
            1.0 - self.ssd / total
        }
    }
}

/// Sum of squared deviations from the mean.
pub fn ssd(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - mean) * (v - mean)).sum()
}

pub(crate) fn costs_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= COST_EPSILON * a.abs().max(b.abs()).max(1.0)
}

/// Positions in sorted `values` where a class may begin: only between two
/// distinct values, so equal values always share a class.
pub fn candidate_breaks(sorted: &[f64]) -> Vec<usize> {
    (1..sorted.len()).filter(|&i| sorted[i - 1] < sorted[i]).collect()
}

/// Jenks natural breaks by dynamic programming.
///
/// Minimises total within-class SSD over contiguous partitions of the
/// sorted values. Among partitions of equal cost the one whose break
/// indices are lexicographically smallest wins.
pub fn jenks_breaks(values: &[f64], k: usize) -> Result<Classification, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let cuts = candidate_breaks(&sorted);
    let distinct = cuts.len() + 1;
    if k == 0 || k > distinct {
        return Err(StatsError::InvalidK { k, distinct });
    }

    // Class boundaries: 0, the admissible cuts, then n.
    let n = sorted.len();
    let mut nodes = vec![0];
    nodes.extend(&cuts);
    nodes.push(n);
    let m = nodes.len();

    // Prefix sums give each class cost in O(1).
    let mut s1 = vec![0.0; n + 1];
    let mut s2 = vec![0.0; n + 1];
    for (i, v) in sorted.iter().enumerate() {
        s1[i + 1] = s1[i] + v;
        s2[i + 1] = s2[i] + v * v;
    }
    let cost = |a: usize, b: usize| {
        let (lo, hi) = (nodes[a], nodes[b]);
        let len = (hi - lo) as f64;
        let sum = s1[hi] - s1[lo];
        (s2[hi] - s2[lo] - sum * sum / len).max(0.0)
    };

    // suffix[c][a]: least cost of splitting nodes[a]..n into c classes.
    let mut suffix = vec![vec![f64::INFINITY; m]; k + 1];
    suffix[0][m - 1] = 0.0;
    for c in 1..=k {
        for a in 0..m - 1 {
            let mut best = f64::INFINITY;
            for (b, &rest) in suffix[c - 1].iter().enumerate().skip(a + 1) {
                if rest.is_finite() {
                    best = best.min(cost(a, b) + rest);
                }
            }
            suffix[c][a] = best;
        }
    }

    // Walk forward taking the earliest break that stays optimal.
    let mut break_nodes = Vec::with_capacity(k - 1);
    let mut a = 0;
    for c in (2..=k).rev() {
        let target = suffix[c][a];
        let b = (a + 1..m - 1)
            .find(|&b| suffix[c - 1][b].is_finite() && costs_equal(cost(a, b) + suffix[c - 1][b], target))
            .expect("an optimal break exists");
        break_nodes.push(b);
        a = b;
    }

    let break_indices: Vec<usize> = break_nodes.iter().map(|&b| nodes[b]).collect();
    let breaks = break_indices.iter().map(|&i| sorted[i - 1]).collect();
    let mut bounds = vec![0];
    bounds.extend(&break_indices);
    bounds.push(n);
    let total = bounds.windows(2).map(|w| ssd(&sorted[w[0]..w[1]])).sum();
    Ok(Classification {
        k,
        breaks,
        break_indices,
        sorted,
        ssd: total,
    })
}

/// Services per country, ordered by count descending then country.
pub fn count_by_country<'a>(
    services: impl IntoIterator<Item = &'a ServiceRecord>,
    filter: Option<&dyn Fn(&ServiceRecord) -> bool>,
) -> Vec<CountryCount> {
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for s in services {
        if filter.map_or(true, |f| f(s)) {
            *counts.entry(s.country.as_str()).or_default() += 1;
        }
    }
    let mut out: Vec<CountryCount> = counts
        .into_iter()
        .map(|(country, count)| CountryCount {
            country: country.to_string(),
            count,
        })
        .collect();
    out.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.country.cmp(&b.country)));
    out
}

pub fn country_counts(
    catalogue: &Catalogue,
    filter: Option<&dyn Fn(&ServiceRecord) -> bool>,
) -> Result<Vec<CountryCount>, CatalogueError> {
    Ok(count_by_country(&catalogue.list_services()?, filter))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CountryClass {
    pub country: String,
    pub count: u64,
    pub class_index: usize,
    pub labeled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CountryClassification {
    pub requested_k: usize,
    /// Set when there were fewer distinct counts than requested classes.
    pub fallback: bool,
    pub k: usize,
    pub breaks: Vec<f64>,
    pub gvf: f64,
    pub countries: Vec<CountryClass>,
}

impl CountryClassification {
    pub fn labeled(&self) -> BTreeSet<&str> {
        self.countries
            .iter()
            .filter(|c| c.labeled)
            .map(|c| c.country.as_str())
            .collect()
    }
}

/// Classifies country counts into `k` natural-breaks classes and labels the
/// countries in the top three classes. With fewer distinct counts than `k`
/// the class count drops to the number of distinct counts.
pub fn classify_countries(counts: &[CountryCount], k: usize) -> CountryClassification {
    let values: Vec<f64> = counts.iter().map(|c| c.count as f64).collect();
    let distinct = values.iter().map(|v| v.to_bits()).collect::<BTreeSet<_>>().len();
    if distinct == 0 {
        return CountryClassification {
            requested_k: k,
            fallback: false,
            k: 0,
            breaks: Vec::new(),
            gvf: 1.0,
            countries: Vec::new(),
        };
    }
    let effective = k.clamp(1, distinct);
    let classification = jenks_breaks(&values, effective).expect("k is within the distinct-value count");
    let first_labeled = effective.saturating_sub(LABELED_TOP_CLASSES) + 1;
    let countries = counts
        .iter()
        .map(|c| {
            let class_index = classification.class_of(c.count as f64);
            CountryClass {
                country: c.country.clone(),
                count: c.count,
                class_index,
                labeled: class_index >= first_labeled,
            }
        })
        .collect();
    CountryClassification {
        requested_k: k,
        fallback: effective != k,
        k: effective,
        gvf: classification.gvf(),
        breaks: classification.breaks,
        countries,
    }
}

/// Provider name, or the capabilities host when the document named none.
pub fn provider_label(service: &ServiceRecord) -> String {
    let name = service.provider_name.trim();
    if !name.is_empty() {
        return name.to_string();
    }
    Url::parse(&service.url)
        .ok()
        .and_then(|u| u.host_str().map(str::to_string))
        .unwrap_or_else(|| service.url.clone())
}

/// The `n` providers with most services, optionally within one country.
pub fn rank_providers<'a>(
    services: impl IntoIterator<Item = &'a ServiceRecord>,
    n: usize,
    country: Option<&str>,
) -> Result<Vec<ProviderCount>, StatsError> {
    if n == 0 {
        return Err(StatsError::InvalidN);
    }
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for s in services {
        if country.map_or(true, |c| s.country.eq_ignore_ascii_case(c)) {
            *counts.entry(provider_label(s)).or_default() += 1;
        }
    }
    let mut out: Vec<ProviderCount> = counts
        .into_iter()
        .map(|(provider, count)| ProviderCount { provider, count })
        .collect();
    out.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.provider.cmp(&b.provider)));
    out.truncate(n);
    Ok(out)
}

#[derive(Debug, thiserror::Error)]
pub enum StatsQueryError {
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Catalogue(#[from] CatalogueError),
}

pub fn top_providers(
    catalogue: &Catalogue,
    n: usize,
    country: Option<&str>,
) -> Result<Vec<ProviderCount>, StatsQueryError> {
    if n == 0 {
        return Err(StatsError::InvalidN.into());
    }
    Ok(rank_providers(&catalogue.list_services()?, n, country)?)
}

fn write_csv<R: Serialize>(header: &[&str], rows: &[R]) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.serialize(row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("csv output is utf-8")
}

/// `country,count,classIndex,labeled` rows.
pub fn countries_csv(classification: &CountryClassification) -> String {
    write_csv(
        &["country", "count", "classIndex", "labeled"],
        &classification.countries,
    )
}

/// `provider,count` rows.
pub fn providers_csv(providers: &[ProviderCount]) -> String {
    write_csv(&["provider", "count"], providers)
}
