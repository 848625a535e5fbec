use super::ast::{CmpOp, CqlExpr, Literal};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at position {position}: {message}")]
pub struct SyntaxError {
    /// Character offset into the input; equal to its length at end of input.
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Num(f64),
    Op(CmpOp),
    LParen,
    RParen,
    Comma,
    And,
    Or,
    Not,
    Like,
    Bbox,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Str(_) => "string".into(),
            Tok::Num(n) => format!("number {n}"),
            Tok::Op(op) => format!("`{}`", op.symbol()),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::And => "AND".into(),
            Tok::Or => "OR".into(),
            Tok::Not => "NOT".into(),
            Tok::Like => "LIKE".into(),
            Tok::Bbox => "BBOX".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn err(position: usize, message: impl Into<String>) -> SyntaxError {
    SyntaxError {
        position,
        message: message.into(),
    }
}

fn lex(input: &str) -> Result<Vec<(Tok, usize)>, SyntaxError> {
    let chars: Vec<char> = input.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            '(' => {
                i += 1;
                Tok::LParen
            }
            ')' => {
                i += 1;
                Tok::RParen
            }
            ',' => {
                i += 1;
                Tok::Comma
            }
            '=' => {
                i += 1;
                Tok::Op(CmpOp::Eq)
            }
            '<' => {
                i += 1;
                match chars.get(i) {
                    Some('>') => {
                        i += 1;
                        Tok::Op(CmpOp::Ne)
                    }
                    Some('=') => {
                        i += 1;
                        Tok::Op(CmpOp::Le)
                    }
                    _ => Tok::Op(CmpOp::Lt),
                }
            }
            '>' => {
                i += 1;
                if chars.get(i) == Some(&'=') {
                    i += 1;
                    Tok::Op(CmpOp::Ge)
                } else {
                    Tok::Op(CmpOp::Gt)
                }
            }
            '\'' => {
                i += 1;
                let mut s = String::new();
                loop {
                    match chars.get(i) {
                        None => return Err(err(start, "unterminated string")),
                        Some('\'') if chars.get(i + 1) == Some(&'\'') => {
                            s.push('\'');
                            i += 2;
                        }
                        Some('\'') => {
                            i += 1;
                            break;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            i += 1;
                        }
                    }
                }
                Tok::Str(s)
            }
            c if c.is_ascii_digit() || c == '-' || c == '.' => {
                let mut j = i;
                if chars[j] == '-' {
                    j += 1;
                }
                let digits_start = j;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let mut mantissa_digits = j - digits_start;
                if j < chars.len() && chars[j] == '.' {
                    j += 1;
                    let frac = j;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    mantissa_digits += j - frac;
                }
                if mantissa_digits == 0 {
                    return Err(err(start, "malformed number"));
                }
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                        k += 1;
                    }
                    let exp = k;
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                    if k == exp {
                        return Err(err(start, "malformed number exponent"));
                    }
                    j = k;
                }
                let text: String = chars[i..j].iter().collect();
                let value: f64 = text.parse().map_err(|_| err(start, "malformed number"))?;
                if !value.is_finite() {
                    return Err(err(start, "number out of range"));
                }
                i = j;
                Tok::Num(value)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphabetic() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                i = j;
                match word.to_ascii_uppercase().as_str() {
                    "AND" => Tok::And,
                    "OR" => Tok::Or,
                    "NOT" => Tok::Not,
                    "LIKE" => Tok::Like,
                    "BBOX" => Tok::Bbox,
                    _ => Tok::Ident(word),
                }
            }
            other => return Err(err(start, format!("unexpected character `{other}`"))),
        };
        out.push((tok, start));
    }
    out.push((Tok::End, chars.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

/// Nesting limit, so hostile input cannot exhaust the stack.
const MAX_NESTING: usize = 256;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn at(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), SyntaxError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(err(
                self.at(),
                format!("expected {}, found {}", want.describe(), self.peek().describe()),
            ))
        }
    }

    fn or(&mut self, depth: usize) -> Result<CqlExpr, SyntaxError> {
        let mut left = self.and(depth)?;
        while *self.peek() == Tok::Or {
            self.bump();
            let right = self.and(depth)?;
            left = CqlExpr::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn and(&mut self, depth: usize) -> Result<CqlExpr, SyntaxError> {
        let mut left = self.unary(depth)?;
        while *self.peek() == Tok::And {
            self.bump();
            let right = self.unary(depth)?;
            left = CqlExpr::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn unary(&mut self, depth: usize) -> Result<CqlExpr, SyntaxError> {
        if depth > MAX_NESTING {
            return Err(err(self.at(), "expression nested too deeply"));
        }
        match self.peek() {
            Tok::Not => {
                self.bump();
                Ok(CqlExpr::Not(Box::new(self.unary(depth + 1)?)))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.or(depth + 1)?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            _ => self.predicate(),
        }
    }

    fn number(&mut self) -> Result<f64, SyntaxError> {
        if let Tok::Num(n) = *self.peek() {
            self.bump();
            Ok(n)
        } else {
            Err(err(
                self.at(),
                format!("expected number, found {}", self.peek().describe()),
            ))
        }
    }

    fn predicate(&mut self) -> Result<CqlExpr, SyntaxError> {
        let start = self.at();
        match self.bump() {
            Tok::Bbox => {
                self.expect(Tok::LParen)?;
                let min_lon = self.number()?;
                self.expect(Tok::Comma)?;
                let min_lat = self.number()?;
                self.expect(Tok::Comma)?;
                let max_lon = self.number()?;
                self.expect(Tok::Comma)?;
                let max_lat = self.number()?;
                self.expect(Tok::RParen)?;
                Ok(CqlExpr::BboxIntersects {
                    min_lon,
                    min_lat,
                    max_lon,
                    max_lat,
                })
            }
            Tok::Ident(name) => match self.peek().clone() {
                Tok::Like => {
                    self.bump();
                    let at = self.at();
                    match self.bump() {
                        Tok::Str(pattern) if name.eq_ignore_ascii_case("anytext") => Ok(CqlExpr::AnyTextLike(pattern)),
                        Tok::Str(pattern) => Ok(CqlExpr::Like {
                            property: name,
                            pattern,
                        }),
                        other => Err(err(at, format!("expected pattern string, found {}", other.describe()))),
                    }
                }
                Tok::Op(op) => {
                    self.bump();
                    let at = self.at();
                    let literal = match self.bump() {
                        Tok::Str(s) => Literal::Str(s),
                        Tok::Num(n) => Literal::Num(n),
                        other => return Err(err(at, format!("expected literal, found {}", other.describe()))),
                    };
                    Ok(CqlExpr::Comparison {
                        property: name,
                        op,
                        literal,
                    })
                }
                other => Err(err(
                    self.at(),
                    format!("expected comparison operator or LIKE, found {}", other.describe()),
                )),
            },
            other => Err(err(start, format!("expected predicate, found {}", other.describe()))),
        }
    }
}

/// Parses a constraint. AND binds tighter than OR; both are left-associative.
pub fn parse_cql(text: &str) -> Result<CqlExpr, SyntaxError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let expr = p.or(0)?;
    if *p.peek() != Tok::End {
        return Err(err(p.at(), format!("unexpected {}", p.peek().describe())));
    }
    Ok(expr)
}
