//! A stand-alone CQL model: random expression and record generation, a
//! textual renderer, and a direct interpreter that shares no code with the
//! crate's evaluator.

use rand::rngs::StdRng;
use rand::Rng;
use regex::Regex;

#[derive(Debug, Clone)]
pub enum Lit {
    Str(String),
    Num(f64),
}

#[derive(Debug, Clone)]
pub enum Expr {
    Cmp(String, &'static str, Lit),
    Like(String, String),
    AnyText(String),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    Bbox([f64; 4]),
}

#[derive(Debug, Clone, Default)]
pub struct Record {
    pub props: Vec<(String, Vec<String>)>,
    pub bbox: Option<[f64; 4]>,
    pub any_text: String,
}

pub const PROPERTIES: [&str; 8] = [
    "title",
    "abstract",
    "keywords",
    "format",
    "score",
    "version",
    "country",
    "quality_level",
];
const OPS: [&str; 6] = ["=", "<>", "<", ">", "<=", ">="];
const WORDS: [&str; 16] = [
    "Sea Surface Temperature",
    "sst",
    "SST analysis",
    "ozone",
    "Ozone Column",
    "image/png",
    "10",
    "2.5",
    "-3",
    "100",
    "1.3.0",
    "us",
    "DE",
    "o'brien",
    "50% cover",
    "",
];

fn word(rng: &mut StdRng) -> String {
    WORDS[rng.random_range(0..WORDS.len())].to_string()
}

pub fn random_record(rng: &mut StdRng) -> Record {
    let mut props = Vec::new();
    for p in PROPERTIES {
        if rng.random_bool(0.8) {
            let n = rng.random_range(1..=3);
            props.push((p.to_string(), (0..n).map(|_| word(rng)).collect::<Vec<String>>()));
        }
    }
    let bbox = rng.random_bool(0.85).then(|| random_box(rng));
    let text_of = |name: &str| {
        props
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.join(" "))
            .unwrap_or_default()
    };
    let any_text = [text_of("title"), text_of("abstract"), text_of("keywords")].join(" ");
    Record { props, bbox, any_text }
}

fn random_box(rng: &mut StdRng) -> [f64; 4] {
    let (a, b) = (rng.random_range(-20..=20) as f64, rng.random_range(-20..=20) as f64);
    let (c, d) = (rng.random_range(-20..=20) as f64, rng.random_range(-20..=20) as f64);
    [a.min(b), c.min(d), a.max(b), c.max(d)]
}

fn random_pattern(rng: &mut StdRng) -> String {
    let base = word(rng);
    let mut out = String::new();
    for ch in base.chars() {
        match rng.random_range(0..10) {
            0 => out.push('%'),
            1 => out.push('_'),
            2 => {}
            3 => out.extend(ch.to_uppercase()),
            _ => out.push(ch),
        }
    }
    match rng.random_range(0..4) {
        0 => format!("%{out}"),
        1 => format!("{out}%"),
        2 => format!("%{out}%"),
        _ => out,
    }
}

fn random_literal(rng: &mut StdRng) -> Lit {
    if rng.random_bool(0.4) {
        let n = rng.random_range(-20..=120) as f64 / if rng.random_bool(0.5) { 1.0 } else { 4.0 };
        Lit::Num(n)
    } else {
        Lit::Str(word(rng))
    }
}

fn random_property(rng: &mut StdRng) -> String {
    let p = if rng.random_bool(0.1) {
        "missing_field"
    } else {
        PROPERTIES[rng.random_range(0..PROPERTIES.len())]
    };
    // Property names are case-insensitive.
    if rng.random_bool(0.2) {
        p.to_uppercase()
    } else {
        p.to_string()
    }
}

/// An expression of at most `depth` levels.
pub fn random_expr(rng: &mut StdRng, depth: usize) -> Expr {
    if depth <= 1 || rng.random_bool(0.3) {
        return match rng.random_range(0..4) {
            0 => Expr::Cmp(
                random_property(rng),
                OPS[rng.random_range(0..OPS.len())],
                random_literal(rng),
            ),
            1 => Expr::Like(random_property(rng), random_pattern(rng)),
            2 => Expr::AnyText(random_pattern(rng)),
            _ => Expr::Bbox(random_box(rng)),
        };
    }
    match rng.random_range(0..3) {
        0 => Expr::And(
            Box::new(random_expr(rng, depth - 1)),
            Box::new(random_expr(rng, depth - 1)),
        ),
        1 => Expr::Or(
            Box::new(random_expr(rng, depth - 1)),
            Box::new(random_expr(rng, depth - 1)),
        ),
        _ => Expr::Not(Box::new(random_expr(rng, depth - 1))),
    }
}

pub fn depth(e: &Expr) -> usize {
    match e {
        Expr::And(a, b) | Expr::Or(a, b) => 1 + depth(a).max(depth(b)),
        Expr::Not(a) => 1 + depth(a),
        _ => 1,
    }
}

fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

fn keyword(rng: &mut StdRng, kw: &str) -> String {
    match rng.random_range(0..3) {
        0 => kw.to_lowercase(),
        1 => kw.to_string(),
        _ => {
            let mut c = kw.chars();
            let first = c.next().unwrap();
            format!("{first}{}", c.as_str().to_lowercase())
        }
    }
}

/// Renders with random keyword case and spacing. Compound operands are
/// always parenthesised, so the text parses back to the same tree.
pub fn render(rng: &mut StdRng, e: &Expr) -> String {
    let sp = |rng: &mut StdRng| if rng.random_bool(0.3) { "  " } else { " " };
    match e {
        Expr::Cmp(p, op, lit) => {
            let lit = match lit {
                Lit::Str(s) => quote(s),
                Lit::Num(n) => format!("{n}"),
            };
            format!("{p}{}{op}{}{lit}", sp(rng), sp(rng))
        }
        Expr::Like(p, pat) => format!("{p} {} {}", keyword(rng, "LIKE"), quote(pat)),
        Expr::AnyText(pat) => format!("{} {} {}", keyword(rng, "AnyText"), keyword(rng, "LIKE"), quote(pat)),
        Expr::And(a, b) => format!(
            "({}){}{}{}({})",
            render(rng, a),
            sp(rng),
            keyword(rng, "AND"),
            sp(rng),
            render(rng, b)
        ),
        Expr::Or(a, b) => format!("({}) {} ({})", render(rng, a), keyword(rng, "OR"), render(rng, b)),
        Expr::Not(a) => format!("{} ({})", keyword(rng, "NOT"), render(rng, a)),
        Expr::Bbox([a, b, c, d]) => format!("{}({a}, {b},{c} ,{d})", keyword(rng, "BBOX")),
    }
}

fn like(pattern: &str, text: &str) -> bool {
    let mut re = String::from("(?s)^");
    for ch in pattern.to_lowercase().chars() {
        match ch {
            '%' => re.push_str(".*"),
            '_' => re.push('.'),
            c => re.push_str(&regex::escape(&c.to_string())),
        }
    }
    re.push('$');
    Regex::new(&re).unwrap().is_match(&text.to_lowercase())
}

fn number(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn compare(value: &str, op: &str, lit: &Lit) -> bool {
    let (lit_num, lit_text) = match lit {
        Lit::Num(n) => (Some(*n), format!("{n}")),
        Lit::Str(s) => (number(s), s.clone()),
    };
    let ord = match (number(value), lit_num) {
        (Some(a), Some(b)) => a.partial_cmp(&b).unwrap(),
        _ => value.to_lowercase().cmp(&lit_text.to_lowercase()),
    };
    match op {
        "=" => ord.is_eq(),
        "<>" => ord.is_ne(),
        "<" => ord.is_lt(),
        ">" => ord.is_gt(),
        "<=" => ord.is_le(),
        ">=" => ord.is_ge(),
        _ => unreachable!(),
    }
}

fn values<'a>(r: &'a Record, name: &str) -> &'a [String] {
    r.props
        .iter()
        .find(|(k, _)| k.eq_ignore_ascii_case(name))
        .map(|(_, v)| v.as_slice())
        .unwrap_or(&[])
}

pub fn eval(e: &Expr, r: &Record) -> bool {
    match e {
        Expr::Cmp(p, op, lit) => values(r, p).iter().any(|v| compare(v, op, lit)),
        Expr::Like(p, pat) => values(r, p).iter().any(|v| like(pat, v)),
        Expr::AnyText(pat) => like(pat, &r.any_text),
        Expr::And(a, b) => eval(a, r) && eval(b, r),
        Expr::Or(a, b) => eval(a, r) || eval(b, r),
        Expr::Not(a) => !eval(a, r),
        Expr::Bbox([x0, y0, x1, y1]) => r
            .bbox
            .is_some_and(|[a, b, c, d]| a <= *x1 && *x0 <= c && b <= *y1 && *y0 <= d),
    }
}
