use serde::Serialize;

/// Number of body bytes inspected when sniffing a response.
pub const SNIFF_WINDOW: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum DocKind {
    Html,
    OwsCapabilities,
    OwsException,
    Other,
}

/// Classifies a response from its Content-Type header and body prefix.
///
/// Only the first [`SNIFF_WINDOW`] bytes are read. Evidence from the body
/// takes precedence over the header.
pub fn classify_response(content_type: &str, body: &[u8]) -> DocKind {
    let prefix = &body[..body.len().min(SNIFF_WINDOW)];
    let header_html = {
        let mime = content_type.split(';').next().unwrap_or("").trim().to_ascii_lowercase();
        mime == "text/html" || mime == "application/xhtml+xml"
    };

    match sniff(prefix) {
        Some(Sniffed::DoctypeHtml) => DocKind::Html,
        Some(Sniffed::Root { name, xml_decl }) => {
            let local = name.rsplit(':').next().unwrap_or(&name);
            if local.ends_with("Capabilities") {
                DocKind::OwsCapabilities
            } else if local == "ServiceExceptionReport" || local == "ExceptionReport" {
                DocKind::OwsException
            } else if local.eq_ignore_ascii_case("html") {
                DocKind::Html
            } else if xml_decl {
                DocKind::Other
            } else if header_html || is_html_tag(local) {
                DocKind::Html
            } else {
                DocKind::Other
            }
        }
        None if header_html => DocKind::Html,
        None => DocKind::Other,
    }
}

fn is_html_tag(name: &str) -> bool {
    ["head", "body", "div", "p", "a", "table", "meta", "title"]
        .iter()
        .any(|t| name.eq_ignore_ascii_case(t))
}

#[derive(Debug, PartialEq, Eq)]
enum Sniffed {
    DoctypeHtml,
    Root { name: String, xml_decl: bool },
}

/// Finds the first element name, skipping a BOM, whitespace, the XML
/// declaration, processing instructions, comments and DOCTYPE.
fn sniff(bytes: &[u8]) -> Option<Sniffed> {
    let mut s = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
    let mut xml_decl = false;
    loop {
        s = trim_start(s);
        if s.starts_with(b"<?") {
            if s.len() >= 5 && s[2..5].eq_ignore_ascii_case(b"xml") {
                xml_decl = true;
            }
            s = skip_past(s, b"?>")?;
        } else if s.starts_with(b"<!--") {
            s = skip_past(s, b"-->")?;
        } else if s.len() >= 9 && s[..9].eq_ignore_ascii_case(b"<!doctype") {
            let rest = trim_start(&s[9..]);
            if rest.len() >= 4 && rest[..4].eq_ignore_ascii_case(b"html") {
                return Some(Sniffed::DoctypeHtml);
            }
            s = skip_doctype(s)?;
        } else if s.first() == Some(&b'<') {
            let name: Vec<u8> = s[1..]
                .iter()
                .take_while(|b| !b.is_ascii_whitespace() && **b != b'>' && **b != b'/')
                .copied()
                .collect();
            if name.is_empty() || !(name[0].is_ascii_alphabetic() || name[0] == b'_') {
                return None;
            }
            return Some(Sniffed::Root {
                name: String::from_utf8_lossy(&name).into_owned(),
                xml_decl,
            });
        } else {
            return None;
        }
    }
}

fn trim_start(s: &[u8]) -> &[u8] {
    let n = s.iter().take_while(|b| b.is_ascii_whitespace()).count();
    &s[n..]
}

fn skip_past<'a>(s: &'a [u8], needle: &[u8]) -> Option<&'a [u8]> {
    s.windows(needle.len())
        .position(|w| w == needle)
        .map(|i| &s[i + needle.len()..])
}

fn skip_doctype(s: &[u8]) -> Option<&[u8]> {
    let mut depth = 0i32;
    for (i, b) in s.iter().enumerate() {
        match b {
            b'[' => depth += 1,
            b']' => depth -= 1,
            b'>' if depth <= 0 => return Some(&s[i + 1..]),
            _ => {}
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_examples() {
        assert_eq!(classify_response("text/html", b"<html><body/></html>"), DocKind::Html);
        assert_eq!(
            classify_response(
                "text/xml",
                b"<?xml version=\"1.0\"?><WMS_Capabilities version=\"1.3.0\">"
            ),
            DocKind::OwsCapabilities
        );
        assert_eq!(
            classify_response(
                "text/html",
                b"<?xml version=\"1.0\"?>\n<wfs:WFS_Capabilities xmlns:wfs=\"x\">"
            ),
            DocKind::OwsCapabilities
        );
    }

    #[test]
    fn exceptions_and_legacy_roots() {
        let legacy = b"<?xml version=\"1.0\"?><!DOCTYPE WMT_MS_Capabilities SYSTEM \"x.dtd\" [ <!ELEMENT a ANY> ]><WMT_MS_Capabilities/>";
        assert_eq!(
            classify_response("application/vnd.ogc.wms_xml", legacy),
            DocKind::OwsCapabilities
        );
        assert_eq!(
            classify_response("text/xml", b"<ServiceExceptionReport version=\"1.3.0\"/>"),
            DocKind::OwsException
        );
        assert_eq!(
            classify_response("text/xml", b"<!-- c --><ows:ExceptionReport/>"),
            DocKind::OwsException
        );
    }

    #[test]
    fn html_detection_paths() {
        assert_eq!(classify_response("text/plain", b"<!DOCTYPE html><p>"), DocKind::Html);
        assert_eq!(classify_response("text/html", b"just text"), DocKind::Html);
        assert_eq!(classify_response("", b"<div>x</div>"), DocKind::Html);
        assert_eq!(
            classify_response("text/html", b"<?xml version=\"1.0\"?><rss/>"),
            DocKind::Other
        );
        assert_eq!(classify_response("application/json", b"{}"), DocKind::Other);
        assert_eq!(classify_response("", b""), DocKind::Other);
    }

    #[test]
    fn only_the_sniff_window_matters() {
        let mut body = vec![b' '; SNIFF_WINDOW];
        body.extend_from_slice(b"<WMS_Capabilities/>");
        assert_eq!(classify_response("text/xml", &body), DocKind::Other);
        let head = &body[..SNIFF_WINDOW];
        assert_eq!(
            classify_response("text/xml", head),
            classify_response("text/xml", &body)
        );
    }
}
