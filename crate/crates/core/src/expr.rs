//! Test-function expressions.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | primary
//! primary := number | variable | call | '(' expr ')'
//! call    := name '(' expr (',' expr)* ')'
//! ```
//!
//! Calls: `min(a, b, ..)`, `max(a, b, ..)`, `abs(a)`, `exp(a)`, `sin(a)`,
//! `cos(a)`, `pow(a, p/q)` and the quadratic forms `quad(c)` (one variable,
//! `c·x²`) and `quad(c11, c12, c22)` (two variables,
//! `c11·x1² + 2·c12·x1·x2 + c22·x2²`).
//!
//! `pow` takes a constant rational exponent. Integer exponents keep the sign
//! of the base (`pow(-2, 3) = -8`); any other exponent is applied to the
//! absolute value of the base (`pow(-4, 1/2) = 2`), so the power is defined
//! everywhere.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("parse error at column {column}: {message}")]
pub struct ParseError {
    /// 1-based character column.
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Min(Vec<Node>),
    Max(Vec<Node>),
    Abs(Box<Node>),
    Exp(Box<Node>),
    Sin(Box<Node>),
    Cos(Box<Node>),
    Pow { base: Box<Node>, num: i64, den: i64 },
    Quad([f64; 3]),
}

impl Node {
    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Node::Const(c) => *c,
            Node::Var(i) => x[*i],
            Node::Neg(a) => -a.eval(x),
            Node::Add(a, b) => a.eval(x) + b.eval(x),
            Node::Sub(a, b) => a.eval(x) - b.eval(x),
            Node::Mul(a, b) => a.eval(x) * b.eval(x),
            Node::Div(a, b) => a.eval(x) / b.eval(x),
            Node::Min(args) => args.iter().map(|a| a.eval(x)).fold(f64::INFINITY, f64::min),
            Node::Max(args) => args
                .iter()
                .map(|a| a.eval(x))
                .fold(f64::NEG_INFINITY, f64::max),
            Node::Abs(a) => a.eval(x).abs(),
            Node::Exp(a) => a.eval(x).exp(),
            Node::Sin(a) => a.eval(x).sin(),
            Node::Cos(a) => a.eval(x).cos(),
            Node::Pow { base, num, den } => {
                let b = base.eval(x);
                if *den == 1 {
                    b.powi(*num as i32)
                } else {
                    b.abs().powf(*num as f64 / *den as f64)
                }
            }
            Node::Quad(c) => {
                let x0 = x[0];
                let x1 = if x.len() > 1 { x[1] } else { 0.0 };
                c[0] * x0 * x0 + 2.0 * c[1] * x0 * x1 + c[2] * x1 * x1
            }
        }
    }

    fn constant(&self) -> Option<f64> {
        match self {
            Node::Const(c) => Some(*c),
            Node::Neg(a) => a.constant().map(|v| -v),
            Node::Add(a, b) => Some(a.constant()? + b.constant()?),
            Node::Sub(a, b) => Some(a.constant()? - b.constant()?),
            Node::Mul(a, b) => Some(a.constant()? * b.constant()?),
            Node::Div(a, b) => Some(a.constant()? / b.constant()?),
            _ => None,
        }
    }
}

/// A parsed expression in named variables.
#[derive(Debug, Clone)]
pub struct FunctionExpr {
    text: String,
    root: Node,
    arity: usize,
}

impl PartialEq for FunctionExpr {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root && self.arity == other.arity
    }
}

impl fmt::Display for FunctionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl FunctionExpr {
    /// Parses an expression over `x` (dimension 1) or `x1, x2` (dimension 2,
    /// with `x`, `y` accepted as aliases).
    pub fn parse(text: &str, dim: usize) -> Result<Self, ParseError> {
        match dim {
            1 => Self::parse_with(text, &[("x", 0)]),
            2 => Self::parse_with(text, &[("x1", 0), ("x2", 1), ("x", 0), ("y", 1)]),
            _ => Err(ParseError {
                column: 1,
                message: format!("unsupported dimension {dim}"),
            }),
        }
    }

    /// Parses with an explicit variable table of `(name, slot)` pairs.
    pub fn parse_with(text: &str, vars: &[(&str, usize)]) -> Result<Self, ParseError> {
        let tokens = lex(text)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            vars,
            end_col: text.chars().count() + 1,
        };
        let root = p.expr(None)?;
        if let Some(t) = p.peek() {
            return Err(ParseError {
                column: t.col,
                message: format!("unexpected {}", t.kind.describe()),
            });
        }
        let arity = vars.iter().map(|(_, i)| i + 1).max().unwrap_or(0);
        Ok(FunctionExpr {
            text: text.trim().to_string(),
            root,
            arity,
        })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Number of variable slots.
    pub fn dim(&self) -> usize {
        self.arity
    }

    /// Evaluates at `x`; `x` must hold at least [`dim`](Self::dim) entries.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.root.eval(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Comma,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: Tok,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let simple = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(kind) = simple {
            out.push(Token { kind, col });
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
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
            let v: f64 = s.parse().map_err(|_| ParseError {
                column: col,
                message: format!("malformed number '{s}'"),
            })?;
            out.push(Token {
                kind: Tok::Num(v),
                col,
            });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                kind: Tok::Ident(chars[start..i].iter().collect()),
                col,
            });
        } else {
            return Err(ParseError {
                column: col,
                message: format!("unexpected character '{c}'"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    vars: &'a [(&'a str, usize)],
    end_col: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    /// `open` is the column of the innermost unclosed parenthesis; running out
    /// of input inside it is reported there.
    fn eof(&self, open: Option<usize>, what: &str) -> ParseError {
        match open {
            Some(col) => ParseError {
                column: col,
                message: format!("unclosed '(' (expected {what})"),
            },
            None => ParseError {
                column: self.end_col,
                message: format!("unexpected end of input (expected {what})"),
            },
        }
    }

    fn expr(&mut self, open: Option<usize>) -> Result<Node, ParseError> {
        let mut lhs = self.term(open)?;
        while let Some(t) = self.peek() {
            match t.kind {
                Tok::Plus => {
                    self.pos += 1;
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term(open)?));
                }
                Tok::Minus => {
                    self.pos += 1;
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term(open)?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn term(&mut self, open: Option<usize>) -> Result<Node, ParseError> {
        let mut lhs = self.unary(open)?;
        while let Some(t) = self.peek() {
            match t.kind {
                Tok::Star => {
                    self.pos += 1;
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.unary(open)?));
                }
                Tok::Slash => {
                    self.pos += 1;
                    lhs = Node::Div(Box::new(lhs), Box::new(self.unary(open)?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self, open: Option<usize>) -> Result<Node, ParseError> {
        if let Some(Token {
            kind: Tok::Minus, ..
        }) = self.peek()
        {
            self.pos += 1;
            return Ok(Node::Neg(Box::new(self.unary(open)?)));
        }
        self.primary(open)
    }

    fn primary(&mut self, open: Option<usize>) -> Result<Node, ParseError> {
        let Some(tok) = self.next() else {
            return Err(self.eof(open, "an expression"));
        };
        match tok.kind {
            Tok::Num(v) => Ok(Node::Const(v)),
            Tok::LParen => {
                let inner = self.expr(Some(tok.col))?;
                self.expect_close(tok.col)?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if let Some(Token {
                    kind: Tok::LParen,
                    col,
                }) = self.peek().cloned()
                {
                    self.pos += 1;
                    let args = self.args(col)?;
                    return self.call(&name, tok.col, args);
                }
                match self.vars.iter().find(|(n, _)| *n == name) {
                    Some((_, slot)) => Ok(Node::Var(*slot)),
                    None => Err(ParseError {
                        column: tok.col,
                        message: format!("unknown variable '{name}'"),
                    }),
                }
            }
            other => Err(ParseError {
                column: tok.col,
                message: format!("unexpected {}", other.describe()),
            }),
        }
    }

    fn expect_close(&mut self, open_col: usize) -> Result<(), ParseError> {
        match self.next() {
            Some(Token {
                kind: Tok::RParen, ..
            }) => Ok(()),
            Some(t) => Err(ParseError {
                column: t.col,
                message: format!("expected ')', found {}", t.kind.describe()),
            }),
            None => Err(self.eof(Some(open_col), "')'")),
        }
    }

    fn args(&mut self, open_col: usize) -> Result<Vec<(Node, usize)>, ParseError> {
        let mut out = Vec::new();
        loop {
            let col = self.peek().map(|t| t.col).unwrap_or(self.end_col);
            out.push((self.expr(Some(open_col))?, col));
            match self.next() {
                Some(Token {
                    kind: Tok::Comma, ..
                }) => continue,
                Some(Token {
                    kind: Tok::RParen, ..
                }) => return Ok(out),
                Some(t) => {
                    return Err(ParseError {
                        column: t.col,
                        message: format!("expected ',' or ')', found {}", t.kind.describe()),
                    })
                }
                None => return Err(self.eof(Some(open_col), "')'")),
            }
        }
    }

    fn call(&self, name: &str, col: usize, args: Vec<(Node, usize)>) -> Result<Node, ParseError> {
        let arity_err = |want: &str| ParseError {
            column: col,
            message: format!("{name} takes {want} argument(s), got {}", args.len()),
        };
        let mut nodes: Vec<Node> = args.iter().map(|(n, _)| n.clone()).collect();
        let unary = |nodes: &mut Vec<Node>| -> Result<Box<Node>, ParseError> {
            if nodes.len() != 1 {
                return Err(arity_err("1"));
            }
            Ok(Box::new(nodes.pop().unwrap()))
        };
        match name {
            "abs" => Ok(Node::Abs(unary(&mut nodes)?)),
            "exp" => Ok(Node::Exp(unary(&mut nodes)?)),
            "sin" => Ok(Node::Sin(unary(&mut nodes)?)),
            "cos" => Ok(Node::Cos(unary(&mut nodes)?)),
            "min" | "max" => {
                if nodes.len() < 2 {
                    return Err(arity_err("at least 2"));
                }
                Ok(if name == "min" {
                    Node::Min(nodes)
                } else {
                    Node::Max(nodes)
                })
            }
            "pow" => {
                if nodes.len() != 2 {
                    return Err(arity_err("2"));
                }
                let exp_col = args[1].1;
                let e = nodes[1].constant().ok_or_else(|| ParseError {
                    column: exp_col,
                    message: "pow exponent must be a constant".into(),
                })?;
                let (num, den) = rational(e).ok_or_else(|| ParseError {
                    column: exp_col,
                    message: format!("pow exponent {e} is not a rational p/q with q <= 1000"),
                })?;
                Ok(Node::Pow {
                    base: Box::new(nodes.swap_remove(0)),
                    num,
                    den,
                })
            }
            "quad" => {
                let mut cs = Vec::with_capacity(nodes.len());
                for (n, c) in &args {
                    cs.push(n.constant().ok_or_else(|| ParseError {
                        column: *c,
                        message: "quad coefficients must be constants".into(),
                    })?);
                }
                match cs.as_slice() {
                    [c] => Ok(Node::Quad([*c, 0.0, 0.0])),
                    [a, b, c] => Ok(Node::Quad([*a, *b, *c])),
                    _ => Err(arity_err("1 or 3")),
                }
            }
            _ => Err(ParseError {
                column: col,
                message: format!("unknown function '{name}'"),
            }),
        }
    }
}

fn rational(v: f64) -> Option<(i64, i64)> {
    if !v.is_finite() {
        return None;
    }
    for den in 1..=1000i64 {
        let num = (v * den as f64).round();
        if (num - v * den as f64).abs() < 1e-9 && num.abs() < 1e9 {
            return Some((num as i64, den));
        }
    }
    None
}

/// A named example function with its default box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub expr: &'static str,
    pub lo: f64,
    pub hi: f64,
}

/// Named one-dimensional test functions.
pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "paper.example1.f",
        expr: "exp(x)",
        lo: -6.0,
        hi: 2.0,
    },
    CatalogEntry {
        name: "paper.example1.g",
        expr: "-x*x+4",
        lo: -6.0,
        hi: 2.0,
    },
    CatalogEntry {
        name: "paper.kink",
        expr: "abs(abs(x)-1)",
        lo: -2.0,
        hi: 2.0,
    },
    CatalogEntry {
        name: "paper.pow32",
        expr: "-pow(abs(x),3/2)",
        lo: -2.0,
        hi: 2.0,
    },
    CatalogEntry {
        name: "paper.negabs",
        expr: "-abs(x)",
        lo: -2.0,
        hi: 2.0,
    },
    CatalogEntry {
        name: "paper.twowells",
        expr: "min(x*x,(x-2)*(x-2)-1)",
        lo: -2.0,
        hi: 4.0,
    },
    CatalogEntry {
        name: "convex.square",
        expr: "x*x",
        lo: -2.0,
        hi: 2.0,
    },
    CatalogEntry {
        name: "convex.abs",
        expr: "abs(x)",
        lo: -2.0,
        hi: 2.0,
    },
    CatalogEntry {
        name: "concave.square",
        expr: "-x*x",
        lo: -2.0,
        hi: 2.0,
    },
    CatalogEntry {
        name: "mixed.sin",
        expr: "sin(x)",
        lo: -2.0,
        hi: 2.0,
    },
];

/// Named saddle functions `a(x, y)` with X box and Y box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleEntry {
    pub name: &'static str,
    pub expr: &'static str,
    pub x: (f64, f64),
    pub y: (f64, f64),
}

pub const SADDLE_CATALOG: &[SaddleEntry] = &[
    SaddleEntry {
        name: "saddle.bilinear",
        expr: "x*y",
        x: (-2.0, 2.0),
        y: (-2.0, 2.0),
    },
    SaddleEntry {
        name: "saddle.quadratic",
        expr: "x*x + x*y - y*y",
        x: (-2.0, 2.0),
        y: (-2.0, 2.0),
    },
    SaddleEntry {
        name: "saddle.separable",
        expr: "x*x",
        x: (-2.0, 2.0),
        y: (-2.0, 2.0),
    },
    SaddleEntry {
        name: "paper.example1",
        expr: "(1-y)*exp(x) + y*(4-x*x)",
        x: (-6.0, 2.0),
        y: (0.0, 1.0),
    },
];

pub fn catalog(name: &str) -> Option<&'static CatalogEntry> {
    CATALOG.iter().find(|e| e.name == name)
}

pub fn saddle_catalog(name: &str) -> Option<&'static SaddleEntry> {
    SADDLE_CATALOG.iter().find(|e| e.name == name)
}
