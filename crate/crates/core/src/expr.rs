//! Scalar expression ASTs over the variables `x1..xd`: parsing, evaluation,
//! canonical printing, and exact symbolic differentiation.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr   := term (('+' | '-') term)*          left associative
//! term   := factor (('*' | '/') factor)*      left associative
//! factor := '-' factor | power                unary minus
//! power  := atom ('^' uint)?                  integer exponents only
//! atom   := number | name '(' expr ')' | x<k> | '(' expr ')'
//! ```
//!
//! `^` binds tighter than unary minus, which binds tighter than `*` and `/`.
//! Exponents are nonnegative integer literals, so differentiation stays total
//! and `0^0` never arises as a limit form; general powers are written
//! explicitly as `exp(b * log(a))`. The printer emits a fully parenthesized
//! canonical form, and `parse(print(e))` reproduces `e` structurally.

use std::fmt;
use thiserror::Error;

/// Single-argument functions available in expressions.
///
/// `sign` evaluates to -1, 0, or 1 (with `sign(0) = 0`); it exists mainly so
/// that `abs` has a representable derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Tanh,
    Abs,
    Sqrt,
    Sign,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Tanh => "tanh",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Sign => "sign",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "tanh" => Func::Tanh,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "sign" => Func::Sign,
            _ => return None,
        })
    }
}

/// Expression AST. Variables are 1-based: `x1` is `Var(1)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected {expected}, found {found}")]
    Syntax {
        offset: usize,
        expected: String,
        found: String,
    },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("variable x{index} exceeds dimension {dims} at byte {offset}")]
    DimensionExceeded {
        index: usize,
        dims: usize,
        offset: usize,
    },
}

/// Evaluation failure, carrying the printed offending subexpression.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("division by zero in `{expr}`")]
    DivisionByZero { expr: String },
    #[error("log of non-positive value {value} in `{expr}`")]
    LogNonPositive { value: f64, expr: String },
    #[error("sqrt of negative value {value} in `{expr}`")]
    SqrtNegative { value: f64, expr: String },
    #[error("point has {provided} coordinates but `{expr}` needs x{index}")]
    PointTooShort {
        index: usize,
        provided: usize,
        expr: String,
    },
}

// ---------------------------------------------------------------------------
// Tokenizer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number `{v}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'+' => {
                toks.push((Tok::Plus, i));
                i += 1;
            }
            b'-' => {
                toks.push((Tok::Minus, i));
                i += 1;
            }
            b'*' => {
                toks.push((Tok::Star, i));
                i += 1;
            }
            b'/' => {
                toks.push((Tok::Slash, i));
                i += 1;
            }
            b'^' => {
                toks.push((Tok::Caret, i));
                i += 1;
            }
            b'(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            b')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value = text.parse::<f64>().map_err(|_| ParseError::Syntax {
                    offset: start,
                    expected: "a numeric literal".into(),
                    found: format!("`{text}`"),
                })?;
                toks.push((Tok::Num(value), start));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                toks.push((Tok::Ident(src[start..i].to_string()), start));
            }
            _ => {
                return Err(ParseError::Syntax {
                    offset: i,
                    expected: "a number, identifier, operator, or parenthesis".into(),
                    found: format!("`{}`", &src[i..i + 1]),
                })
            }
        }
    }
    toks.push((Tok::Eof, src.len()));
    Ok(toks)
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    dims: usize,
}

impl Parser {
    fn peek(&self) -> &(Tok, usize) {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, expected: &str) -> ParseError {
        let (tok, offset) = self.peek();
        ParseError::Syntax {
            offset: *offset,
            expected: expected.into(),
            found: tok.describe(),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.peek().0 {
            Tok::RParen => {
                self.bump();
                Ok(())
            }
            _ => Err(self.err("`)`")),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().0 {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek().0 {
                Tok::Star => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Tok::Slash => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if matches!(self.peek().0, Tok::Minus) {
            self.bump();
            let inner = self.factor()?;
            // A minus applied directly to a literal folds into the constant so
            // that printed negative constants re-parse to the same node.
            return Ok(match inner {
                Expr::Const(v) => Expr::Const(-v),
                other => Expr::Sub(Box::new(Expr::Const(0.0)), Box::new(other)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if matches!(self.peek().0, Tok::Caret) {
            self.bump();
            let (tok, offset) = self.bump();
            // Exponents stay within i32 so powi never wraps.
            let exponent = match tok {
                Tok::Num(v) if v.fract() == 0.0 && v >= 0.0 && v <= i32::MAX as f64 => v as u32,
                other => {
                    return Err(ParseError::Syntax {
                        offset,
                        expected: "a nonnegative integer exponent".into(),
                        found: other.describe(),
                    })
                }
            };
            return Ok(Expr::Pow(Box::new(base), exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (tok, offset) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if let Some(func) = Func::from_name(&name) {
                    match self.peek().0 {
                        Tok::LParen => {
                            self.bump();
                        }
                        _ => return Err(self.err("`(` after function name")),
                    }
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                if let Some(rest) = name.strip_prefix('x') {
                    if let Ok(index) = rest.parse::<usize>() {
                        if index == 0 || rest.starts_with('0') {
                            return Err(ParseError::UnknownIdentifier { name, offset });
                        }
                        if index > self.dims {
                            return Err(ParseError::DimensionExceeded {
                                index,
                                dims: self.dims,
                                offset,
                            });
                        }
                        return Ok(Expr::Var(index));
                    }
                }
                Err(ParseError::UnknownIdentifier { name, offset })
            }
            other => Err(ParseError::Syntax {
                offset,
                expected: "a number, variable, function call, or `(`".into(),
                found: other.describe(),
            }),
        }
    }
}

/// Parses `src` as an expression over `x1..x<d>`.
pub fn parse(src: &str, dims: usize) -> Result<Expr, ParseError> {
    let mut parser = Parser {
        toks: tokenize(src)?,
        pos: 0,
        dims,
    };
    let expr = parser.expr()?;
    match parser.peek().0 {
        Tok::Eof => Ok(expr),
        _ => Err(parser.err("an operator or end of input")),
    }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Evaluates `e` at `point` in IEEE doubles with a fixed node order.
pub fn eval(e: &Expr, point: &[f64]) -> Result<f64, DomainError> {
    match e {
        Expr::Const(v) => Ok(*v),
        Expr::Var(i) => point
            .get(i - 1)
            .copied()
            .ok_or_else(|| DomainError::PointTooShort {
                index: *i,
                provided: point.len(),
                expr: e.to_string(),
            }),
        Expr::Add(a, b) => Ok(eval(a, point)? + eval(b, point)?),
        Expr::Sub(a, b) => Ok(eval(a, point)? - eval(b, point)?),
        Expr::Mul(a, b) => Ok(eval(a, point)? * eval(b, point)?),
        Expr::Div(a, b) => {
            let num = eval(a, point)?;
            let den = eval(b, point)?;
            if den == 0.0 {
                return Err(DomainError::DivisionByZero {
                    expr: e.to_string(),
                });
            }
            Ok(num / den)
        }
        Expr::Pow(base, k) => Ok(eval(base, point)?.powi(*k as i32)),
        Expr::Call(func, arg) => {
            let v = eval(arg, point)?;
            Ok(match func {
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
                Func::Exp => v.exp(),
                Func::Log => {
                    if v <= 0.0 {
                        return Err(DomainError::LogNonPositive {
                            value: v,
                            expr: e.to_string(),
                        });
                    }
                    v.ln()
                }
                Func::Tanh => v.tanh(),
                Func::Abs => v.abs(),
                Func::Sqrt => {
                    if v < 0.0 {
                        return Err(DomainError::SqrtNegative {
                            value: v,
                            expr: e.to_string(),
                        });
                    }
                    v.sqrt()
                }
                Func::Sign => {
                    if v == 0.0 {
                        0.0
                    } else {
                        v.signum()
                    }
                }
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Differentiation with constant folding
// ---------------------------------------------------------------------------

fn finite_const(v: f64) -> Option<Expr> {
    v.is_finite().then_some(Expr::Const(v))
}

fn fold_add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(0.0), _) => return b,
        (_, Expr::Const(0.0)) => return a,
        (Expr::Const(x), Expr::Const(y)) => {
            if let Some(c) = finite_const(x + y) {
                return c;
            }
        }
        _ => {}
    }
    Expr::Add(Box::new(a), Box::new(b))
}

fn fold_sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (_, Expr::Const(0.0)) => return a,
        (Expr::Const(x), Expr::Const(y)) => {
            if let Some(c) = finite_const(x - y) {
                return c;
            }
        }
        _ => {}
    }
    Expr::Sub(Box::new(a), Box::new(b))
}

fn fold_neg(a: Expr) -> Expr {
    fold_sub(Expr::Const(0.0), a)
}

fn fold_mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(0.0), _) | (_, Expr::Const(0.0)) => return Expr::Const(0.0),
        (Expr::Const(1.0), _) => return b,
        (_, Expr::Const(1.0)) => return a,
        (Expr::Const(x), Expr::Const(y)) => {
            if let Some(c) = finite_const(x * y) {
                return c;
            }
        }
        _ => {}
    }
    Expr::Mul(Box::new(a), Box::new(b))
}

fn fold_div(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(0.0), _) => return Expr::Const(0.0),
        (_, Expr::Const(1.0)) => return a,
        (Expr::Const(x), Expr::Const(y)) if *y != 0.0 => {
            if let Some(c) = finite_const(x / y) {
                return c;
            }
        }
        _ => {}
    }
    Expr::Div(Box::new(a), Box::new(b))
}

fn fold_pow(base: Expr, k: u32) -> Expr {
    match k {
        0 => return Expr::Const(1.0),
        1 => return base,
        _ => {}
    }
    if let Expr::Const(v) = base {
        if let Some(c) = finite_const(v.powi(k as i32)) {
            return c;
        }
    }
    Expr::Pow(Box::new(base), k)
}

/// Exact symbolic partial derivative with respect to `x<var>`.
///
/// `abs` differentiates to `sign`, with the convention `sign(0) = 0`; the
/// derivative of `sign` itself is taken as 0 everywhere. Folding applies only
/// here, so parsed trees keep their source shape.
pub fn differentiate(e: &Expr, var: usize) -> Expr {
    match e {
        Expr::Const(_) => Expr::Const(0.0),
        Expr::Var(i) => Expr::Const(if *i == var { 1.0 } else { 0.0 }),
        Expr::Add(a, b) => fold_add(differentiate(a, var), differentiate(b, var)),
        Expr::Sub(a, b) => fold_sub(differentiate(a, var), differentiate(b, var)),
        Expr::Mul(a, b) => fold_add(
            fold_mul(differentiate(a, var), (**b).clone()),
            fold_mul((**a).clone(), differentiate(b, var)),
        ),
        Expr::Div(a, b) => fold_div(
            fold_sub(
                fold_mul(differentiate(a, var), (**b).clone()),
                fold_mul((**a).clone(), differentiate(b, var)),
            ),
            fold_pow((**b).clone(), 2),
        ),
        Expr::Pow(base, k) => fold_mul(
            fold_mul(
                Expr::Const(*k as f64),
                fold_pow((**base).clone(), k.saturating_sub(1)),
            ),
            differentiate(base, var),
        ),
        Expr::Call(func, arg) => {
            let du = differentiate(arg, var);
            let u = (**arg).clone();
            match func {
                Func::Sin => fold_mul(Expr::Call(Func::Cos, Box::new(u)), du),
                Func::Cos => fold_mul(fold_neg(Expr::Call(Func::Sin, Box::new(u))), du),
                Func::Exp => fold_mul(Expr::Call(Func::Exp, Box::new(u)), du),
                Func::Log => fold_div(du, u),
                Func::Tanh => fold_mul(
                    fold_sub(
                        Expr::Const(1.0),
                        fold_pow(Expr::Call(Func::Tanh, Box::new(u)), 2),
                    ),
                    du,
                ),
                Func::Abs => fold_mul(Expr::Call(Func::Sign, Box::new(u)), du),
                Func::Sqrt => fold_div(
                    du,
                    fold_mul(Expr::Const(2.0), Expr::Call(Func::Sqrt, Box::new(u))),
                ),
                Func::Sign => Expr::Const(0.0),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Canonical printer
// ---------------------------------------------------------------------------

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => write!(f, "{v}"),
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            // A bare negative constant base would re-parse as unary minus of
            // the whole power, so it gets its own parentheses.
            Expr::Pow(base, k) => match **base {
                Expr::Const(v) if v.is_sign_negative() => write!(f, "(({v}) ^ {k})"),
                _ => write!(f, "({base} ^ {k})"),
            },
            Expr::Call(func, arg) => write!(f, "{}({arg})", func.name()),
        }
    }
}
