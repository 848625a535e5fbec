use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
}

impl CmpOp {
    pub const ALL: [CmpOp; 6] = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Gt, CmpOp::Le, CmpOp::Ge];

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "<>",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
        }
    }

    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Eq => ord == Equal,
            CmpOp::Ne => ord != Equal,
            CmpOp::Lt => ord == Less,
            CmpOp::Gt => ord == Greater,
            CmpOp::Le => ord != Greater,
            CmpOp::Ge => ord != Less,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Literal {
    Str(String),
    Num(f64),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Str(s) => write_quoted(f, s),
            Literal::Num(n) => write!(f, "{n}"),
        }
    }
}

fn write_quoted(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    write!(f, "'{}'", s.replace('\'', "''"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CqlExpr {
    Comparison {
        property: String,
        op: CmpOp,
        literal: Literal,
    },
    Like {
        property: String,
        pattern: String,
    },
    AnyTextLike(String),
    And(Box<CqlExpr>, Box<CqlExpr>),
    Or(Box<CqlExpr>, Box<CqlExpr>),
    Not(Box<CqlExpr>),
    BboxIntersects {
        min_lon: f64,
        min_lat: f64,
        max_lon: f64,
        max_lat: f64,
    },
}

impl CqlExpr {
    pub fn and(self, other: CqlExpr) -> CqlExpr {
        CqlExpr::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: CqlExpr) -> CqlExpr {
        CqlExpr::Or(Box::new(self), Box::new(other))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> CqlExpr {
        CqlExpr::Not(Box::new(self))
    }

    pub fn depth(&self) -> usize {
        match self {
            CqlExpr::And(a, b) | CqlExpr::Or(a, b) => 1 + a.depth().max(b.depth()),
            CqlExpr::Not(e) => 1 + e.depth(),
            _ => 1,
        }
    }
}

/// Fully parenthesized rendering; parsing it yields the same tree.
impl fmt::Display for CqlExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CqlExpr::Comparison { property, op, literal } => write!(f, "{property} {} {literal}", op.symbol()),
            CqlExpr::Like { property, pattern } => {
                write!(f, "{property} LIKE ")?;
                write_quoted(f, pattern)
            }
            CqlExpr::AnyTextLike(pattern) => {
                write!(f, "AnyText LIKE ")?;
                write_quoted(f, pattern)
            }
            CqlExpr::And(a, b) => write!(f, "({a} AND {b})"),
            CqlExpr::Or(a, b) => write!(f, "({a} OR {b})"),
            CqlExpr::Not(e) => write!(f, "NOT ({e})"),
            CqlExpr::BboxIntersects {
                min_lon,
                min_lat,
                max_lon,
                max_lat,
            } => write!(f, "BBOX({min_lon}, {min_lat}, {max_lon}, {max_lat})"),
        }
    }
}
