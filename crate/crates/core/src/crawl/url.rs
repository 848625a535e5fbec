use url::Url;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed URL `{input}`: {reason}")]
pub struct MalformedUrl {
    pub input: String,
    pub reason: String,
}

/// Canonical form used for frontier deduplication.
///
/// Scheme and host are lowercased, default ports dropped, dot-segments
/// resolved and the fragment removed. Query keys are lowercased and the
/// pairs stably sorted by key; values keep their case. Only http and https
/// URLs with a host are accepted.
pub fn normalize_url(raw: &str) -> Result<Url, MalformedUrl> {
    let url = Url::parse(raw.trim()).map_err(|e| MalformedUrl {
        input: raw.to_string(),
        reason: e.to_string(),
    })?;
    if !matches!(url.scheme(), "http" | "https") || url.host_str().map_or(true, str::is_empty) {
        return Err(MalformedUrl {
            input: raw.to_string(),
            reason: "only http and https URLs with a host are supported".into(),
        });
    }
    Ok(canonicalize(url))
}

/// Resolves `href` against `base` and canonicalizes the result.
pub fn resolve_url(base: &Url, href: &str) -> Result<Url, MalformedUrl> {
    let url = base.join(href.trim()).map_err(|e| MalformedUrl {
        input: href.to_string(),
        reason: e.to_string(),
    })?;
    Ok(canonicalize(url))
}

fn canonicalize(mut url: Url) -> Url {
    url.set_fragment(None);
    let pairs: Option<Vec<(String, String)>> = url.query().map(|_| {
        let mut pairs: Vec<(String, String)> = url
            .query_pairs()
            .map(|(k, v)| (k.to_ascii_lowercase(), v.into_owned()))
            .collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        pairs
    });
    match pairs {
        Some(pairs) if !pairs.is_empty() => {
            let query = form_query(&pairs);
            url.set_query(Some(&query));
        }
        Some(_) => url.set_query(None),
        None => {}
    }
    url
}

/// Serializes pairs with a minimal escape set, so that OGC-style values
/// such as `image/png` or `EPSG:4326` stay readable.
pub(crate) fn form_query(pairs: &[(String, String)]) -> String {
    let mut out = String::new();
    for (i, (k, v)) in pairs.iter().enumerate() {
        if i > 0 {
            out.push('&');
        }
        escape_into(&mut out, k);
        out.push('=');
        escape_into(&mut out, v);
    }
    out
}

fn escape_into(out: &mut String, s: &str) {
    for b in s.bytes() {
        match b {
            b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'-' | b'_' | b'.' | b'~' | b'/' | b':' | b',' | b'*' => {
                out.push(b as char)
            }
            _ => out.push_str(&format!("%{b:02X}")),
        }
    }
}

/// Host used for politeness bookkeeping, including a non-default port.
pub fn host_key(url: &Url) -> String {
    match (url.host_str(), url.port()) {
        (Some(h), Some(p)) => format!("{h}:{p}"),
        (Some(h), None) => h.to_string(),
        (None, _) => String::new(),
    }
}
