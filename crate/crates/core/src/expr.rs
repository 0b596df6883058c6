//! Bivariate real expressions: parsing, printing and evaluation over any
//! [`Scalar`] algebra.
//!
//! The grammar is the usual one:
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' factor)?
//! atom   := NUMBER | 'pi' | 'e' | IDENT | IDENT '(' expr ')' | '(' expr ')'
//! ```
//!
//! `t` and `s` are accepted as aliases of `x` and `y` and are normalized
//! away at parse time. A minus sign directly in front of a numeric literal
//! (and not followed by `^`) folds into a negative constant, which is what
//! lets [`Expression::pretty_print`] round-trip constants of either sign.

use std::fmt;
use std::ops;

use thiserror::Error;

/// One of the two independent variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    pub fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
            BinaryOp::Pow => '^',
        }
    }
}

/// Elementary functions available in call nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 5] = [Func::Sin, Func::Cos, Func::Exp, Func::Log, Func::Sqrt];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Value, first and second derivative of the function at `v`.
    pub fn jet(self, v: f64) -> Result<(f64, f64, f64), EvalError> {
        match self {
            Func::Sin => {
                let (s, c) = v.sin_cos();
                Ok((s, c, -s))
            }
            Func::Cos => {
                let (s, c) = v.sin_cos();
                Ok((c, -s, -c))
            }
            Func::Exp => {
                let e = v.exp();
                Ok((e, e, e))
            }
            Func::Log => {
                if v <= 0.0 {
                    return Err(EvalError::Domain { func: "log", arg: v });
                }
                Ok((v.ln(), 1.0 / v, -1.0 / (v * v)))
            }
            Func::Sqrt => {
                if v < 0.0 {
                    return Err(EvalError::Domain { func: "sqrt", arg: v });
                }
                let r = v.sqrt();
                Ok((r, 0.5 / r, -0.25 / (r * v)))
            }
        }
    }
}

/// Parsed bivariate expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Constant(f64),
    Variable(Var),
    Unary(UnaryOp, Box<Expression>),
    Binary(BinaryOp, Box<Expression>, Box<Expression>),
    Call(Func, Box<Expression>),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("parse error at offset {offset}: {message} (near `{token}`)")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
    pub token: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EvalError {
    #[error("non-finite value produced by {op}")]
    NonFinite { op: &'static str },
    #[error("{func} is undefined at {arg}")]
    Domain { func: &'static str, arg: f64 },
}

/// A real scalar algebra an [`Expression`] can be evaluated over.
///
/// Implementors only need arithmetic, a way to embed constants and a chain
/// rule for elementary functions; integer and real powers are derived.
pub trait Scalar:
    Copy
    + fmt::Debug
    + ops::Add<Output = Self>
    + ops::Sub<Output = Self>
    + ops::Mul<Output = Self>
    + ops::Div<Output = Self>
    + ops::Neg<Output = Self>
{
    fn lift(c: f64) -> Self;

    fn value(&self) -> f64;

    /// All components finite.
    fn is_finite(&self) -> bool;

    /// True when every derivative component is zero.
    fn is_constant(&self) -> bool;

    /// Compose with a scalar function whose value and first two derivatives
    /// at `self.value()` are `u`, `du`, `d2u`.
    fn chain(self, u: f64, du: f64, d2u: f64) -> Self;

    /// Integer power by square-and-multiply.
    fn powi(self, n: i64) -> Self {
        let mut base = self;
        let mut k = n.unsigned_abs();
        let mut acc: Option<Self> = None;
        while k > 0 {
            if k & 1 == 1 {
                acc = Some(match acc {
                    Some(a) => a * base,
                    None => base,
                });
            }
            k >>= 1;
            if k > 0 {
                base = base * base;
            }
        }
        let p = acc.unwrap_or_else(|| Self::lift(1.0));
        if n < 0 {
            Self::lift(1.0) / p
        } else {
            p
        }
    }
}

impl Scalar for f64 {
    fn lift(c: f64) -> Self {
        c
    }

    fn value(&self) -> f64 {
        *self
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }

    fn is_constant(&self) -> bool {
        true
    }

    fn chain(self, u: f64, _du: f64, _d2u: f64) -> Self {
        u
    }
}

fn checked<S: Scalar>(v: S, op: &'static str) -> Result<S, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite { op })
    }
}

/// Apply an elementary function over the algebra.
pub fn apply_func<S: Scalar>(func: Func, a: S) -> Result<S, EvalError> {
    let (u, du, d2u) = func.jet(a.value())?;
    checked(a.chain(u, du, d2u), func.name())
}

/// `base ^ exponent`: exact repeated multiplication for constant integer
/// exponents, `exp(p log b)` with a positive base otherwise.
pub fn power<S: Scalar>(base: S, exponent: S) -> Result<S, EvalError> {
    let p = exponent.value();
    if exponent.is_constant() && p.fract() == 0.0 && p.abs() <= i64::MAX as f64 {
        return checked(base.powi(p as i64), "^");
    }
    if base.value() <= 0.0 {
        return Err(EvalError::Domain {
            func: "^ (non-integer exponent)",
            arg: base.value(),
        });
    }
    let ln = apply_func(Func::Log, base)?;
    apply_func(Func::Exp, checked(exponent * ln, "^")?)
}

impl Expression {
    pub fn constant(c: f64) -> Self {
        Expression::Constant(c)
    }

    pub fn x() -> Self {
        Expression::Variable(Var::X)
    }

    pub fn y() -> Self {
        Expression::Variable(Var::Y)
    }

    pub fn call(func: Func, arg: Expression) -> Self {
        Expression::Call(func, Box::new(arg))
    }

    pub fn binary(op: BinaryOp, lhs: Expression, rhs: Expression) -> Self {
        Expression::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn pow(self, exponent: Expression) -> Self {
        Expression::binary(BinaryOp::Pow, self, exponent)
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        Parser::new(text)?.parse_all()
    }

    /// Evaluate at `(x, y)` over the algebra `S`. Any non-finite
    /// intermediate is an error.
    pub fn evaluate<S: Scalar>(&self, x: S, y: S) -> Result<S, EvalError> {
        match self {
            Expression::Constant(c) => checked(S::lift(*c), "constant"),
            Expression::Variable(Var::X) => Ok(x),
            Expression::Variable(Var::Y) => Ok(y),
            Expression::Unary(UnaryOp::Neg, a) => Ok(-a.evaluate(x, y)?),
            Expression::Binary(op, a, b) => {
                let a = a.evaluate(x, y)?;
                let b = b.evaluate(x, y)?;
                match op {
                    BinaryOp::Add => checked(a + b, "+"),
                    BinaryOp::Sub => checked(a - b, "-"),
                    BinaryOp::Mul => checked(a * b, "*"),
                    BinaryOp::Div => {
                        if b.value() == 0.0 {
                            return Err(EvalError::NonFinite { op: "/" });
                        }
                        checked(a / b, "/")
                    }
                    BinaryOp::Pow => power(a, b),
                }
            }
            Expression::Call(func, a) => apply_func(*func, a.evaluate(x, y)?),
        }
    }

    /// Plain real evaluation.
    pub fn eval_f64(&self, x: f64, y: f64) -> Result<f64, EvalError> {
        self.evaluate(x, y)
    }

    /// Replace every `x` by `sx` and every `y` by `sy`.
    pub fn substitute(&self, sx: &Expression, sy: &Expression) -> Expression {
        match self {
            Expression::Constant(_) => self.clone(),
            Expression::Variable(Var::X) => sx.clone(),
            Expression::Variable(Var::Y) => sy.clone(),
            Expression::Unary(op, a) => Expression::Unary(*op, Box::new(a.substitute(sx, sy))),
            Expression::Binary(op, a, b) => Expression::binary(*op, a.substitute(sx, sy), b.substitute(sx, sy)),
            Expression::Call(func, a) => Expression::call(*func, a.substitute(sx, sy)),
        }
    }

    pub fn uses(&self, var: Var) -> bool {
        match self {
            Expression::Constant(_) => false,
            Expression::Variable(v) => *v == var,
            Expression::Unary(_, a) | Expression::Call(_, a) => a.uses(var),
            Expression::Binary(_, a, b) => a.uses(var) || b.uses(var),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expression::Constant(_) | Expression::Variable(_) => 1,
            Expression::Unary(_, a) | Expression::Call(_, a) => 1 + a.node_count(),
            Expression::Binary(_, a, b) => 1 + a.node_count() + b.node_count(),
        }
    }

    /// Fully parenthesized canonical text; parses back to the same tree.
    pub fn pretty_print(&self) -> String {
        let mut out = String::new();
        self.write_canonical(&mut out);
        out
    }

    fn write_canonical(&self, out: &mut String) {
        match self {
            Expression::Constant(c) => {
                if c.is_sign_negative() {
                    out.push_str(&format!("({c})"));
                } else {
                    out.push_str(&format!("{c}"));
                }
            }
            Expression::Variable(v) => out.push_str(v.name()),
            Expression::Unary(UnaryOp::Neg, a) => {
                out.push_str("(-");
                // keep a bare literal from folding into a negative constant
                let bare_literal = matches!(**a, Expression::Constant(c) if !c.is_sign_negative());
                if bare_literal {
                    out.push('(');
                }
                a.write_canonical(out);
                if bare_literal {
                    out.push(')');
                }
                out.push(')');
            }
            Expression::Binary(op, a, b) => {
                out.push('(');
                a.write_canonical(out);
                out.push(op.symbol());
                b.write_canonical(out);
                out.push(')');
            }
            Expression::Call(func, a) => {
                out.push_str(func.name());
                out.push('(');
                a.write_canonical(out);
                out.push(')');
            }
        }
    }

    /// Indented tree, one node per line.
    pub fn dump_tree(&self) -> String {
        let mut out = String::new();
        self.dump_into(0, &mut out);
        out
    }

    fn dump_into(&self, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        match self {
            Expression::Constant(c) => out.push_str(&format!("{pad}{c}\n")),
            Expression::Variable(v) => out.push_str(&format!("{pad}{}\n", v.name())),
            Expression::Unary(UnaryOp::Neg, a) => {
                out.push_str(&format!("{pad}neg\n"));
                a.dump_into(depth + 1, out);
            }
            Expression::Binary(op, a, b) => {
                out.push_str(&format!("{pad}{}\n", op.symbol()));
                a.dump_into(depth + 1, out);
                b.dump_into(depth + 1, out);
            }
            Expression::Call(func, a) => {
                out.push_str(&format!("{pad}{}\n", func.name()));
                a.dump_into(depth + 1, out);
            }
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty_print())
    }
}

impl std::str::FromStr for Expression {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expression::parse(s)
    }
}

macro_rules! expr_binop {
    ($trait:ident, $method:ident, $op:expr) => {
        impl ops::$trait for Expression {
            type Output = Expression;

            fn $method(self, rhs: Expression) -> Expression {
                Expression::binary($op, self, rhs)
            }
        }
    };
}

expr_binop!(Add, add, BinaryOp::Add);
expr_binop!(Sub, sub, BinaryOp::Sub);
expr_binop!(Mul, mul, BinaryOp::Mul);
expr_binop!(Div, div, BinaryOp::Div);

impl ops::Neg for Expression {
    type Output = Expression;

    fn neg(self) -> Expression {
        Expression::Unary(UnaryOp::Neg, Box::new(self))
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
    Caret,
    LParen,
    RParen,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
    text: String,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // exponent only if a digit follows the optional sign
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lexeme = &text[start..i];
                let value: f64 = lexeme.parse().map_err(|_| ParseError {
                    offset: start,
                    message: "malformed number".into(),
                    token: lexeme.into(),
                })?;
                tokens.push(Token {
                    tok: Tok::Num(value),
                    offset: start,
                    text: lexeme.into(),
                });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let lexeme = &text[start..i];
                tokens.push(Token {
                    tok: Tok::Ident(lexeme.into()),
                    offset: start,
                    text: lexeme.into(),
                });
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    offset: start,
                    message: "unexpected character".into(),
                    token: ch.to_string(),
                });
            }
        };
        i += 1;
        tokens.push(Token {
            tok,
            offset: start,
            text: text[start..i].into(),
        });
    }
    tokens.push(Token {
        tok: Tok::End,
        offset: text.len(),
        text: String::new(),
    });
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        if text.trim().is_empty() {
            return Err(ParseError {
                offset: 0,
                message: "empty expression".into(),
                token: String::new(),
            });
        }
        Ok(Parser {
            tokens: lex(text)?,
            pos: 0,
            depth: 0,
        })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let idx = (self.pos + k).min(self.tokens.len() - 1);
        &self.tokens[idx].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: &str) -> ParseError {
        let t = self.peek();
        ParseError {
            offset: t.offset,
            message: message.into(),
            token: t.text.clone(),
        }
    }

    fn parse_all(mut self) -> Result<Expression, ParseError> {
        let e = self.expr()?;
        match self.peek().tok {
            Tok::End => Ok(e),
            Tok::RParen => Err(self.error("unbalanced parentheses")),
            _ => Err(self.error("unexpected trailing input")),
        }
    }

    fn expr(&mut self) -> Result<Expression, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expression::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expression, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expression::binary(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<Expression, ParseError> {
        self.depth += 1;
        if self.depth > 512 {
            return Err(self.error("expression nested too deeply"));
        }
        let out = if self.peek().tok == Tok::Minus {
            self.bump();
            match (self.peek_at(0).clone(), self.peek_at(1)) {
                (Tok::Num(v), next) if *next != Tok::Caret => {
                    self.bump();
                    Ok(Expression::Constant(-v))
                }
                _ => Ok(-self.factor()?),
            }
        } else {
            self.power()
        };
        self.depth -= 1;
        out
    }

    fn power(&mut self) -> Result<Expression, ParseError> {
        let base = self.atom()?;
        if self.peek().tok == Tok::Caret {
            self.bump();
            let exponent = self.factor()?;
            return Ok(base.pow(exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expression, ParseError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Num(v) => {
                self.bump();
                Ok(Expression::Constant(v))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if self.peek().tok != Tok::RParen {
                    return Err(self.error("unbalanced parentheses"));
                }
                self.bump();
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "x" | "t" => Ok(Expression::x()),
                    "y" | "s" => Ok(Expression::y()),
                    "pi" => Ok(Expression::Constant(std::f64::consts::PI)),
                    "e" => Ok(Expression::Constant(std::f64::consts::E)),
                    other => match Func::from_name(other) {
                        Some(func) => {
                            if self.peek().tok != Tok::LParen {
                                return Err(self.error("expected '(' after function name"));
                            }
                            self.bump();
                            let arg = self.expr()?;
                            if self.peek().tok != Tok::RParen {
                                return Err(self.error("unbalanced parentheses"));
                            }
                            self.bump();
                            Ok(Expression::call(func, arg))
                        }
                        None => Err(ParseError {
                            offset: t.offset,
                            message: "unknown identifier".into(),
                            token: t.text,
                        }),
                    },
                }
            }
            Tok::RParen | Tok::End | Tok::Plus | Tok::Minus | Tok::Star | Tok::Slash | Tok::Caret => {
                Err(self.error("empty operand"))
            }
        }
    }
}
