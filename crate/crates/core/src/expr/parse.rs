//! Line-oriented reader for the map DSL.
//!
//! ```text
//! domain 6
//! codomain 4
//! param alpha
//! F1 = x1
//! F2 = sin(alpha)*x3 - cos(alpha)*x5
//! F3 = x6
//! F4 = x2
//! ```

use super::{BinOp, Expr, Func, MapDefinition};
use crate::error::ParseError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Eq,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        column: col,
        message: message.into(),
    }
}

/// Tokenizes one line. `offset` is the 0-based char column where `text` starts.
fn lex(text: &str, line: usize, offset: usize) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = offset + i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '=' => Some(Tok::Eq),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Spanned { tok, line, col });
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v: f64 = s
                .parse()
                .map_err(|_| syntax(line, col, format!("malformed number `{s}`")))?;
            out.push(Spanned {
                tok: Tok::Num(v),
                line,
                col,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Spanned {
                tok: Tok::Ident(s),
                line,
                col,
            });
            continue;
        }
        return Err(syntax(line, col, format!("unexpected character `{c}`")));
    }
    Ok(out)
}

fn is_ident(s: &str) -> bool {
    let mut it = s.chars();
    matches!(it.next(), Some(c) if c.is_ascii_lowercase())
        && it.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

fn variable_index(s: &str) -> Option<usize> {
    let digits = s.strip_prefix('x')?;
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

struct ExprParser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    line: usize,
    end_col: usize,
    domain: usize,
    params: &'a [String],
}

impl ExprParser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos) {
            Some(t) => (t.line, t.col),
            None => (self.line, self.end_col),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            let inner = self.atom()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.atom()
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            let (l, c) = self.here();
            Err(syntax(l, c, format!("expected {what}")))
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (line, col) = self.here();
        let Some(t) = self.toks.get(self.pos) else {
            return Err(syntax(line, col, "unexpected end of expression"));
        };
        match &t.tok {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Expr::Num(*v))
            }
            Tok::LParen => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.pos += 1;
                if let Some(func) = Func::from_name(name) {
                    self.expect(Tok::LParen, "`(` after function name")?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                if !is_ident(name) {
                    return Err(syntax(line, col, format!("invalid identifier `{name}`")));
                }
                if let Some(k) = variable_index(name) {
                    if k == 0 || k > self.domain {
                        return Err(ParseError::VariableOutOfRange {
                            line,
                            column: col,
                            index: k,
                            domain: self.domain,
                        });
                    }
                    return Ok(Expr::Var(k - 1));
                }
                match self.params.iter().position(|p| p == name) {
                    Some(i) => Ok(Expr::Param(i)),
                    None => Err(ParseError::UndeclaredIdentifier {
                        line,
                        column: col,
                        name: name.clone(),
                    }),
                }
            }
            other => Err(syntax(line, col, format!("unexpected token {other:?}"))),
        }
    }
}

/// Strips a trailing `#` comment.
fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_dim(words: &[&str], line: usize, key: &str) -> Result<usize, ParseError> {
    match words {
        [_, v] => match v.parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(syntax(line, key.len() + 2, format!("`{key}` needs a positive integer"))),
        },
        _ => Err(syntax(line, 1, format!("expected `{key} <integer>`"))),
    }
}

pub(super) fn parse_map(text: &str) -> Result<MapDefinition, ParseError> {
    let mut domain = None;
    let mut codomain = None;
    let mut params: Vec<String> = Vec::new();
    let mut component_lines = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let body = strip_comment(raw);
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let words: Vec<&str> = trimmed.split_whitespace().collect();
        match words[0] {
            "domain" => domain = Some(parse_dim(&words, line_no, "domain")?),
            "codomain" => codomain = Some(parse_dim(&words, line_no, "codomain")?),
            "param" => {
                let [_, name] = words[..] else {
                    return Err(syntax(line_no, 1, "expected `param <ident>`"));
                };
                if !is_ident(name) || variable_index(name).is_some() || Func::from_name(name).is_some() {
                    return Err(syntax(line_no, 7, format!("`{name}` cannot be a parameter name")));
                }
                if params.iter().any(|p| p == name) {
                    return Err(syntax(line_no, 7, format!("parameter `{name}` declared twice")));
                }
                params.push(name.to_string());
            }
            w if w.starts_with('F') => component_lines.push((line_no, body)),
            _ => {
                let col = raw.len() - raw.trim_start().len() + 1;
                return Err(syntax(line_no, col, format!("unknown declaration `{}`", words[0])));
            }
        }
    }

    let domain = domain.ok_or(ParseError::MissingHeader("domain"))?;
    let codomain = codomain.ok_or(ParseError::MissingHeader("codomain"))?;
    if codomain > domain {
        return Err(ParseError::CodomainExceedsDomain { domain, codomain });
    }
    if component_lines.len() != codomain {
        return Err(ParseError::DimensionMismatch {
            declared: codomain,
            found: component_lines.len(),
        });
    }

    let mut components = Vec::with_capacity(codomain);
    for (k, (line_no, body)) in component_lines.into_iter().enumerate() {
        let toks = lex(body, line_no, 0)?;
        let expected = format!("F{}", k + 1);
        match toks.first() {
            Some(Spanned { tok: Tok::Ident(name), .. }) if *name == expected => {}
            Some(t) => {
                return Err(syntax(t.line, t.col, format!("expected `{expected}` (components in order)")))
            }
            None => unreachable!("component line is non-empty"),
        }
        match toks.get(1) {
            Some(Spanned { tok: Tok::Eq, .. }) => {}
            Some(t) => return Err(syntax(t.line, t.col, "expected `=`")),
            None => return Err(syntax(line_no, body.trim_end().len() + 1, "expected `=`")),
        }
        let mut p = ExprParser {
            toks: &toks[2..],
            pos: 0,
            line: line_no,
            end_col: body.trim_end().len() + 1,
            domain,
            params: &params,
        };
        let e = p.expr()?;
        if p.pos != p.toks.len() {
            let (l, c) = p.here();
            return Err(syntax(l, c, "unexpected trailing input"));
        }
        components.push(e);
    }

    Ok(MapDefinition {
        domain_dim: domain,
        codomain_dim: codomain,
        components,
        params,
        source: text.to_string(),
    })
}
