//! Scalar expression engine for user-defined growth laws.
//!
//! Grammar (binary operators are left-associative):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := base ('^' integer)?
//! base   := real | ident | '(' expr ')' | '-' base | func '(' expr ')'
//! func   := atan | exp | log | sqrt | tanh
//! ```
//!
//! Identifiers of the form `x1`, `x2`, ... are state variables; every other
//! identifier is a named parameter resolved when the map is built. Note that
//! per the grammar the exponent applies to the full `base`, so `-x1^2`
//! parses as `(-x1)^2`.
//!
//! Expressions are evaluated as plain `f64` trees. Parameters are
//! substituted up front and constants folded, so repeated evaluation does no
//! name lookups; the same tree walk is used for the symbolic derivatives,
//! keeping evaluation order (and therefore results) reproducible run to run.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Parse failure with 1-based line/column for the offending token.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {col}: {msg}")]
pub struct ExprParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

/// Runtime evaluation failure.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{func}({arg}) is outside the function domain")]
    Domain { func: &'static str, arg: f64 },
    #[error("expression produced a non-finite value")]
    NonFinite,
    #[error("parameter `{0}` has no bound value")]
    UnboundParam(String),
}

/// Unary functions admitted by the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Atan,
    Exp,
    Log,
    Sqrt,
    Tanh,
}

impl Func {
    fn from_ident(s: &str) -> Option<Func> {
        match s {
            "atan" => Some(Func::Atan),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "sqrt" => Some(Func::Sqrt),
            "tanh" => Some(Func::Tanh),
            _ => None,
        }
    }
}

/// Expression tree. Variables are stored zero-based (`Var(0)` is `x1`).
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Param(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i32),
    Apply(Func, Box<Expr>),
}

impl Expr {
    /// Evaluates with all parameters already substituted. `x` is the full
    /// state vector.
    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        let v = self.eval_inner(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    fn eval_inner(&self, x: &[f64]) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => x[*i],
            Expr::Param(name) => return Err(EvalError::UnboundParam(name.clone())),
            Expr::Add(a, b) => a.eval_inner(x)? + b.eval_inner(x)?,
            Expr::Sub(a, b) => a.eval_inner(x)? - b.eval_inner(x)?,
            Expr::Mul(a, b) => a.eval_inner(x)? * b.eval_inner(x)?,
            Expr::Div(a, b) => {
                let den = b.eval_inner(x)?;
                if den == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                a.eval_inner(x)? / den
            }
            Expr::Neg(a) => -a.eval_inner(x)?,
            Expr::Pow(a, m) => {
                let base = a.eval_inner(x)?;
                if *m < 0 && base == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                base.powi(*m)
            }
            Expr::Apply(f, a) => {
                let arg = a.eval_inner(x)?;
                match f {
                    Func::Atan => arg.atan(),
                    Func::Exp => arg.exp(),
                    Func::Tanh => arg.tanh(),
                    Func::Log => {
                        if arg <= 0.0 {
                            return Err(EvalError::Domain { func: "log", arg });
                        }
                        arg.ln()
                    }
                    Func::Sqrt => {
                        if arg < 0.0 {
                            return Err(EvalError::Domain { func: "sqrt", arg });
                        }
                        arg.sqrt()
                    }
                }
            }
        })
    }

    /// Substitutes named parameters and folds constant subtrees. Unknown
    /// parameters are left in place (callers detect them via [`Expr::params`]).
    pub fn bind(&self, lookup: &dyn Fn(&str) -> Option<f64>) -> Expr {
        let bound = match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(i) => Expr::Var(*i),
            Expr::Param(name) => match lookup(name) {
                Some(v) => Expr::Const(v),
                None => Expr::Param(name.clone()),
            },
            Expr::Add(a, b) => Expr::Add(Box::new(a.bind(lookup)), Box::new(b.bind(lookup))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.bind(lookup)), Box::new(b.bind(lookup))),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.bind(lookup)), Box::new(b.bind(lookup))),
            Expr::Div(a, b) => Expr::Div(Box::new(a.bind(lookup)), Box::new(b.bind(lookup))),
            Expr::Neg(a) => Expr::Neg(Box::new(a.bind(lookup))),
            Expr::Pow(a, m) => Expr::Pow(Box::new(a.bind(lookup)), *m),
            Expr::Apply(f, a) => Expr::Apply(*f, Box::new(a.bind(lookup))),
        };
        bound.fold_consts()
    }

    /// Evaluates constant subtrees that cannot fail at runtime. Division,
    /// `log`, and `sqrt` are folded only when they succeed, otherwise the
    /// node is kept so the error surfaces at evaluation time.
    fn fold_consts(self) -> Expr {
        if let Some(v) = self.const_value() {
            if v.is_finite() {
                return Expr::Const(v);
            }
        }
        self
    }

    fn const_value(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            Expr::Var(_) | Expr::Param(_) => None,
            Expr::Add(a, b) => Some(a.const_value()? + b.const_value()?),
            Expr::Sub(a, b) => Some(a.const_value()? - b.const_value()?),
            Expr::Mul(a, b) => Some(a.const_value()? * b.const_value()?),
            Expr::Div(a, b) => {
                let den = b.const_value()?;
                if den == 0.0 {
                    return None;
                }
                Some(a.const_value()? / den)
            }
            Expr::Neg(a) => Some(-a.const_value()?),
            Expr::Pow(a, m) => {
                let base = a.const_value()?;
                if *m < 0 && base == 0.0 {
                    return None;
                }
                Some(base.powi(*m))
            }
            Expr::Apply(f, a) => {
                let arg = a.const_value()?;
                match f {
                    Func::Atan => Some(arg.atan()),
                    Func::Exp => Some(arg.exp()),
                    Func::Tanh => Some(arg.tanh()),
                    Func::Log => (arg > 0.0).then(|| arg.ln()),
                    Func::Sqrt => (arg >= 0.0).then(|| arg.sqrt()),
                }
            }
        }
    }

    /// Symbolic partial derivative with respect to `x{var+1}`.
    pub fn diff(&self, var: usize) -> Expr {
        match self {
            Expr::Const(_) | Expr::Param(_) => Expr::Const(0.0),
            Expr::Var(i) => Expr::Const(if *i == var { 1.0 } else { 0.0 }),
            Expr::Add(a, b) => add(a.diff(var), b.diff(var)),
            Expr::Sub(a, b) => sub(a.diff(var), b.diff(var)),
            Expr::Mul(a, b) => add(
                mul(a.diff(var), (**b).clone()),
                mul((**a).clone(), b.diff(var)),
            ),
            Expr::Div(a, b) => {
                // (a/b)' = a'/b - a b' / b^2
                sub(
                    div(a.diff(var), (**b).clone()),
                    div(
                        mul((**a).clone(), b.diff(var)),
                        Expr::Pow(Box::new((**b).clone()), 2),
                    ),
                )
            }
            Expr::Neg(a) => neg(a.diff(var)),
            Expr::Pow(a, m) => {
                if *m == 0 {
                    return Expr::Const(0.0);
                }
                // (a^m)' = m a^(m-1) a'
                let power = if *m == 1 {
                    Expr::Const(1.0)
                } else {
                    Expr::Pow(Box::new((**a).clone()), m - 1)
                };
                mul(mul(Expr::Const(*m as f64), power), a.diff(var))
            }
            Expr::Apply(f, a) => {
                let da = a.diff(var);
                let inner = (**a).clone();
                match f {
                    // atan(u)' = u' / (1 + u^2)
                    Func::Atan => div(
                        da,
                        add(Expr::Const(1.0), Expr::Pow(Box::new(inner), 2)),
                    ),
                    // exp(u)' = exp(u) u'
                    Func::Exp => mul(Expr::Apply(Func::Exp, Box::new(inner)), da),
                    // log(u)' = u' / u
                    Func::Log => div(da, inner),
                    // sqrt(u)' = u' / (2 sqrt(u))
                    Func::Sqrt => div(
                        da,
                        mul(Expr::Const(2.0), Expr::Apply(Func::Sqrt, Box::new(inner))),
                    ),
                    // tanh(u)' = (1 - tanh(u)^2) u'
                    Func::Tanh => mul(
                        sub(
                            Expr::Const(1.0),
                            Expr::Pow(Box::new(Expr::Apply(Func::Tanh, Box::new(inner))), 2),
                        ),
                        da,
                    ),
                }
            }
        }
    }

    /// Collects the zero-based indices of all state variables that occur.
    pub fn variables(&self, out: &mut BTreeSet<usize>) {
        match self {
            Expr::Var(i) => {
                out.insert(*i);
            }
            Expr::Const(_) | Expr::Param(_) => {}
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.variables(out);
                b.variables(out);
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Apply(_, a) => a.variables(out),
        }
    }

    /// Collects the names of all unresolved parameters.
    pub fn params(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Param(name) => {
                out.insert(name.clone());
            }
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.params(out);
                b.params(out);
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Apply(_, a) => a.params(out),
        }
    }
}

// Smart constructors used by `diff` to keep derivative trees small. These
// only drop exact identities (0 + e, 1 * e, ...), never reassociate, so
// they cannot change floating-point results.

fn add(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
        (Expr::Const(0.0), e) => e,
        (e, Expr::Const(0.0)) => e,
        (a, b) => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
        (e, Expr::Const(0.0)) => e,
        (Expr::Const(0.0), e) => neg(e),
        (a, b) => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
        (Expr::Const(c), _) | (_, Expr::Const(c)) if c == 0.0 => Expr::Const(0.0),
        (Expr::Const(1.0), e) => e,
        (e, Expr::Const(1.0)) => e,
        (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(0.0), _) => Expr::Const(0.0),
        (e, Expr::Const(1.0)) => e,
        (a, b) => Expr::Div(Box::new(a), Box::new(b)),
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(c) => Expr::Const(-c),
        Expr::Neg(inner) => *inner,
        e => Expr::Neg(Box::new(e)),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Number(f64),
    /// Digits-only literal text, kept verbatim so exponents can insist on
    /// integer syntax.
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Number(v) => write!(f, "number `{v}`"),
            TokenKind::Ident(s) => write!(f, "identifier `{s}`"),
            TokenKind::Plus => write!(f, "`+`"),
            TokenKind::Minus => write!(f, "`-`"),
            TokenKind::Star => write!(f, "`*`"),
            TokenKind::Slash => write!(f, "`/`"),
            TokenKind::Caret => write!(f, "`^`"),
            TokenKind::LParen => write!(f, "`(`"),
            TokenKind::RParen => write!(f, "`)`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    col: usize,
    /// Raw source text (used to validate integer exponents).
    text: String,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str, line: usize) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line,
        }
    }

    fn error(&self, col: usize, msg: impl Into<String>) -> ExprParseError {
        ExprParseError {
            line: self.line,
            col,
            msg: msg.into(),
        }
    }

    fn tokens(mut self) -> Result<Vec<Token>, ExprParseError> {
        let mut out = Vec::new();
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            let col = self.pos + 1;
            match c {
                b' ' | b'\t' => {
                    self.pos += 1;
                }
                b'+' => self.push_simple(&mut out, TokenKind::Plus, "+"),
                b'-' => self.push_simple(&mut out, TokenKind::Minus, "-"),
                b'*' => self.push_simple(&mut out, TokenKind::Star, "*"),
                b'/' => self.push_simple(&mut out, TokenKind::Slash, "/"),
                b'^' => self.push_simple(&mut out, TokenKind::Caret, "^"),
                b'(' => self.push_simple(&mut out, TokenKind::LParen, "("),
                b')' => self.push_simple(&mut out, TokenKind::RParen, ")"),
                b'0'..=b'9' | b'.' => out.push(self.lex_number(col)?),
                c if c.is_ascii_alphabetic() || c == b'_' => out.push(self.lex_ident(col)),
                other => {
                    return Err(self.error(
                        col,
                        format!("unexpected character `{}`", other as char),
                    ))
                }
            }
        }
        Ok(out)
    }

    fn push_simple(&mut self, out: &mut Vec<Token>, kind: TokenKind, text: &str) {
        out.push(Token {
            kind,
            col: self.pos + 1,
            text: text.to_string(),
        });
        self.pos += 1;
    }

    fn lex_number(&mut self, col: usize) -> Result<Token, ExprParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            // Only treat as an exponent when followed by digits (with an
            // optional sign); otherwise the `e` begins an identifier.
            let mut probe = self.pos + 1;
            if probe < self.src.len() && matches!(self.src[probe], b'+' | b'-') {
                probe += 1;
            }
            if probe < self.src.len() && self.src[probe].is_ascii_digit() {
                self.pos = probe;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos])
            .expect("ascii slice")
            .to_string();
        let value: f64 = text
            .parse()
            .map_err(|_| self.error(col, format!("malformed number `{text}`")))?;
        Ok(Token {
            kind: TokenKind::Number(value),
            col,
            text,
        })
    }

    fn lex_ident(&mut self, col: usize) -> Token {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos])
            .expect("ascii slice")
            .to_string();
        Token {
            kind: TokenKind::Ident(text.clone()),
            col,
            text,
        }
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    line: usize,
    end_col: usize,
}

impl Parser {
    fn error_at(&self, col: usize, msg: impl Into<String>) -> ExprParseError {
        ExprParseError {
            line: self.line,
            col,
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn advance(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, kind: &TokenKind, what: &str) -> Result<Token, ExprParseError> {
        match self.advance() {
            Some(t) if t.kind == *kind => Ok(t),
            Some(t) => Err(self.error_at(t.col, format!("expected {what}, found {}", t.kind))),
            None => Err(self.error_at(self.end_col, format!("expected {what}, found end of line"))),
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(TokenKind::Plus) => {
                    self.advance();
                    acc = Expr::Add(Box::new(acc), Box::new(self.term()?));
                }
                Some(TokenKind::Minus) => {
                    self.advance();
                    acc = Expr::Sub(Box::new(acc), Box::new(self.term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(TokenKind::Star) => {
                    self.advance();
                    acc = Expr::Mul(Box::new(acc), Box::new(self.factor()?));
                }
                Some(TokenKind::Slash) => {
                    self.advance();
                    acc = Expr::Div(Box::new(acc), Box::new(self.factor()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ExprParseError> {
        let base = self.base()?;
        if matches!(self.peek(), Some(TokenKind::Caret)) {
            self.advance();
            let exponent = self.integer_exponent()?;
            return Ok(Expr::Pow(Box::new(base), exponent));
        }
        Ok(base)
    }

    /// Exponents must be integer literals, optionally negated.
    fn integer_exponent(&mut self) -> Result<i32, ExprParseError> {
        let mut negate = false;
        if matches!(self.peek(), Some(TokenKind::Minus)) {
            self.advance();
            negate = true;
        }
        match self.advance() {
            Some(Token {
                kind: TokenKind::Number(_),
                text,
                col,
            }) => {
                if !text.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(
                        self.error_at(col, format!("exponent must be an integer, got `{text}`"))
                    );
                }
                let v: i32 = text.parse().map_err(|_| {
                    self.error_at(col, format!("exponent `{text}` out of range"))
                })?;
                Ok(if negate { -v } else { v })
            }
            Some(t) => Err(self.error_at(
                t.col,
                format!("expected integer exponent after `^`, found {}", t.kind),
            )),
            None => Err(self.error_at(self.end_col, "expected integer exponent after `^`")),
        }
    }

    fn base(&mut self) -> Result<Expr, ExprParseError> {
        match self.advance() {
            Some(Token {
                kind: TokenKind::Number(v),
                ..
            }) => Ok(Expr::Const(v)),
            Some(Token {
                kind: TokenKind::Minus,
                ..
            }) => Ok(Expr::Neg(Box::new(self.base()?))),
            Some(Token {
                kind: TokenKind::LParen,
                ..
            }) => {
                let inner = self.expr()?;
                self.expect(&TokenKind::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Token {
                kind: TokenKind::Ident(name),
                col,
                ..
            }) => {
                if let Some(func) = Func::from_ident(&name) {
                    self.expect(&TokenKind::LParen, &format!("`(` after `{name}`"))?;
                    let arg = self.expr()?;
                    self.expect(&TokenKind::RParen, "`)`")?;
                    return Ok(Expr::Apply(func, Box::new(arg)));
                }
                if let Some(index) = variable_index(&name) {
                    return Ok(Expr::Var(index));
                }
                if name.starts_with('x') && name[1..].bytes().all(|b| b.is_ascii_digit()) {
                    // x0, x007 and similar: reject rather than treat as a
                    // parameter, since that is almost certainly a typo.
                    return Err(self.error_at(
                        col,
                        format!("`{name}` is not a valid state variable (use x1, x2, ...)"),
                    ));
                }
                Ok(Expr::Param(name))
            }
            Some(t) => Err(self.error_at(
                t.col,
                format!("expected a value or `(`, found {}", t.kind),
            )),
            None => Err(self.error_at(self.end_col, "expected a value, found end of line")),
        }
    }
}

/// `x1` -> 0, `x2` -> 1, ... Leading zeros and `x0` are rejected by
/// returning `None` (the caller decides whether that is a parameter name or
/// an error).
fn variable_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || digits.starts_with('0') {
        return None;
    }
    if !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let index: usize = digits.parse().ok()?;
    Some(index - 1)
}

/// Parses one expression occupying a full source line. `line` is the
/// 1-based line number used in error messages.
pub fn parse_expr(src: &str, line: usize) -> Result<Expr, ExprParseError> {
    let tokens = Lexer::new(src, line).tokens()?;
    let end_col = src.len() + 1;
    let mut parser = Parser {
        tokens,
        pos: 0,
        line,
        end_col,
    };
    let expr = parser.expr()?;
    if let Some(t) = parser.tokens.get(parser.pos) {
        return Err(ExprParseError {
            line,
            col: t.col,
            msg: format!("unexpected {} after end of expression", t.kind),
        });
    }
    Ok(expr)
}
