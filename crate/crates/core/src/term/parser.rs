//! Recursive-descent parser for the term grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := NUMBER | IDENT | '(' expr ')' | '-' factor | FUNC '(' expr ')'
//! ```
//!
//! `FUNC` is one of `exp`, `log`, `phi`, `dphi` or a catalog primitive.
//! A `-` immediately followed by a number literal folds into a negative
//! constant, which is what the printer emits for negative constants.

use super::{RaCatalog, TermNode};
use crate::error::{Error, Result};

/// Names visible to the parser.
#[derive(Debug, Clone, Default)]
pub struct Symbols {
    vars: Vec<String>,
    constants: Vec<(String, f64)>,
    pub catalog: RaCatalog,
}

impl Symbols {
    pub fn new<S: AsRef<str>>(vars: &[S]) -> Self {
        Symbols {
            vars: vars.iter().map(|s| s.as_ref().to_string()).collect(),
            ..Default::default()
        }
    }

    /// Bind an additional name to the next variable index.
    pub fn with_var(mut self, name: &str) -> Self {
        self.vars.push(name.to_string());
        self
    }

    pub fn with_constant(mut self, name: &str, value: f64) -> Self {
        self.constants.push((name.to_string(), value));
        self
    }

    pub fn with_catalog(mut self, catalog: RaCatalog) -> Self {
        self.catalog = catalog;
        self
    }

    pub fn var_names(&self) -> &[String] {
        &self.vars
    }
}

/// Parse `text` with variables named by position in `var_names`.
pub fn parse_term<S: AsRef<str>>(text: &str, var_names: &[S]) -> Result<TermNode> {
    parse_with(text, &Symbols::new(var_names))
}

pub fn parse_with(text: &str, symbols: &Symbols) -> Result<TermNode> {
    let tokens = lex(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        symbols,
    };
    let t = p.expr()?;
    match p.peek() {
        Tok::End => Ok(t),
        other => Err(Error::Syntax {
            column: p.column(),
            message: format!("unexpected {}", other.describe()),
        }),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
            }
            '+' | '-' | '*' | '(' | ')' | ',' => {
                let t = match c {
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    _ => Tok::Comma,
                };
                out.push((t, col));
                i += 1;
            }
            '0'..='9' | '.' => {
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
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let s: String = chars[start..i].iter().collect();
                let v: f64 = s.parse().map_err(|_| Error::Syntax {
                    column: col,
                    message: format!("malformed number `{s}`"),
                })?;
                out.push((Tok::Num(v), col));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), col));
            }
            other => {
                return Err(Error::Syntax {
                    column: col,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    symbols: &'a Symbols,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn column(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(Error::Syntax {
                column: self.column(),
                message: format!("expected {}, found {}", want.describe(), self.peek().describe()),
            })
        }
    }

    fn expr(&mut self) -> Result<TermNode> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = TermNode::add(acc, self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    acc = TermNode::add(acc, TermNode::neg(self.term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<TermNode> {
        let mut acc = self.factor()?;
        while *self.peek() == Tok::Star {
            self.bump();
            acc = TermNode::mul(acc, self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<TermNode> {
        let (tok, col) = self.bump();
        match tok {
            Tok::Num(v) => Ok(TermNode::Const(v)),
            Tok::Minus => {
                if let Tok::Num(v) = *self.peek() {
                    self.bump();
                    return Ok(TermNode::Const(-v));
                }
                Ok(TermNode::neg(self.factor()?))
            }
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => self.identifier(name, col),
            other => Err(Error::Syntax {
                column: col,
                message: format!("unexpected {}", other.describe()),
            }),
        }
    }

    fn identifier(&mut self, name: String, col: usize) -> Result<TermNode> {
        let is_func = matches!(name.as_str(), "exp" | "log" | "phi" | "dphi")
            || self.symbols.catalog.lookup(&name).is_some();
        if is_func {
            let args = self.call_args(&name, col)?;
            if args.len() != 1 {
                return Err(Error::Arity {
                    name,
                    column: col,
                    expected: 1,
                    found: args.len(),
                });
            }
            let a = args.into_iter().next().expect("one argument");
            return Ok(match name.as_str() {
                "exp" => TermNode::exp(a),
                "log" => TermNode::log(a),
                "phi" => TermNode::phi(a),
                "dphi" => TermNode::dphi(a),
                _ => TermNode::ra(self.symbols.catalog.lookup(&name).expect("catalog name"), a),
            });
        }
        let leaf = if let Some(i) = self.symbols.vars.iter().position(|v| *v == name) {
            TermNode::Var(i)
        } else if let Some((_, v)) = self.symbols.constants.iter().find(|(n, _)| *n == name) {
            TermNode::Const(*v)
        } else {
            return Err(Error::UnknownIdentifier { name, column: col });
        };
        if *self.peek() == Tok::LParen {
            let found = self.call_args(&name, col)?.len();
            return Err(Error::Arity {
                name,
                column: col,
                expected: 0,
                found,
            });
        }
        Ok(leaf)
    }

    fn call_args(&mut self, name: &str, col: usize) -> Result<Vec<TermNode>> {
        if *self.peek() != Tok::LParen {
            return Err(Error::Arity {
                name: name.to_string(),
                column: col,
                expected: 1,
                found: 0,
            });
        }
        self.bump();
        let mut args = Vec::new();
        if *self.peek() == Tok::RParen {
            self.bump();
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                _ => break,
            }
        }
        self.expect(Tok::RParen)?;
        Ok(args)
    }
}
