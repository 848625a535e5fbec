//! Local-name navigation helpers over roxmltree.

use roxmltree::Node;

pub(crate) fn is(node: &Node<'_, '_>, local: &str) -> bool {
    node.is_element() && node.tag_name().name() == local
}

pub(crate) fn child<'a, 'i>(node: Node<'a, 'i>, local: &str) -> Option<Node<'a, 'i>> {
    node.children().find(|c| is(c, local))
}

pub(crate) fn children<'a, 'i: 'a>(node: Node<'a, 'i>, local: &'a str) -> impl Iterator<Item = Node<'a, 'i>> + 'a {
    node.children().filter(move |c| is(c, local))
}

/// Follows a path of local names, taking the first match at each step.
pub(crate) fn path<'a, 'i>(node: Node<'a, 'i>, steps: &[&str]) -> Option<Node<'a, 'i>> {
    steps.iter().try_fold(node, |n, step| child(n, step))
}

/// Concatenated, trimmed text content of an element.
pub(crate) fn text(node: Node<'_, '_>) -> String {
    let mut out = String::new();
    for d in node.descendants().filter(|d| d.is_text()) {
        out.push_str(d.text().unwrap_or(""));
    }
    out.trim().to_string()
}

pub(crate) fn child_text(node: Node<'_, '_>, local: &str) -> String {
    child(node, local).map(text).unwrap_or_default()
}

pub(crate) fn path_text(node: Node<'_, '_>, steps: &[&str]) -> String {
    path(node, steps).map(text).unwrap_or_default()
}

/// Non-empty texts of `container/item` elements, e.g. `KeywordList/Keyword`.
pub(crate) fn list(node: Node<'_, '_>, container: &str, item: &str) -> Vec<String> {
    children(node, container)
        .flat_map(|c| children(c, item).map(text).collect::<Vec<_>>())
        .filter(|s| !s.is_empty())
        .collect()
}

pub(crate) fn texts(node: Node<'_, '_>, local: &str) -> Vec<String> {
    children(node, local).map(text).filter(|s| !s.is_empty()).collect()
}

pub(crate) fn parse_f64(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Parses a "x y" coordinate pair.
pub(crate) fn pair(s: &str) -> Option<(f64, f64)> {
    let mut it = s.split_whitespace();
    let a = parse_f64(it.next()?)?;
    let b = parse_f64(it.next()?)?;
    Some((a, b))
}
