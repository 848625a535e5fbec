use std::collections::HashSet;
use std::sync::OnceLock;

use scraper::{Html, Selector};
use url::Url;

use super::url::resolve_url;

fn anchor_selector() -> &'static Selector {
    static SELECTOR: OnceLock<Selector> = OnceLock::new();
    SELECTOR.get_or_init(|| Selector::parse("a[href]").expect("static selector"))
}

/// Canonical http(s) URLs from anchor hrefs, deduplicated and in document
/// order. Unresolvable hrefs are skipped.
pub fn extract_links(html: &[u8], base: &Url) -> Vec<Url> {
    let text = String::from_utf8_lossy(html);
    let doc = Html::parse_document(&text);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for a in doc.select(anchor_selector()) {
        let Some(href) = a.value().attr("href") else { continue };
        let href = href.trim();
        if href.is_empty() || href.starts_with('#') {
            continue;
        }
        let Ok(url) = resolve_url(base, href) else { continue };
        if !matches!(url.scheme(), "http" | "https") {
            continue;
        }
        if seen.insert(url.as_str().to_string()) {
            out.push(url);
        }
    }
    out
}
