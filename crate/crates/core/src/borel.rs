//! A small expression language for bounded Borel functions `b: R -> R`.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := '-' factor | atom ('^' uint)?
//! atom   := number | 'x' | '(' expr ')' | func '(' args ')'
//! ```
//!
//! Functions:
//!
//! | call              | meaning                                   |
//! |-------------------|-------------------------------------------|
//! | `abs(e)`          | `|e|`                                     |
//! | `min(e, e)`       | smaller value                             |
//! | `max(e, e)`       | larger value                              |
//! | `step(a)`         | indicator of `[a, inf)` applied to `x`    |
//! | `ind(a, b)`       | indicator of the closed `[a, b]` at `x`   |
//! | `clamp(lo, hi)`   | `x` clamped into `[lo, hi]`               |
//!
//! The constant arguments of `step`, `ind` and `clamp` must not mention `x`.
//! An optional trailing argument replaces `x` as the point the primitive is
//! applied to, so `step(0, x^2)` is `step(0)` composed after `x^2`. There is
//! no division and no unbounded primitive: every expression maps bounded sets
//! to bounded sets.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error("`{func}` takes {expected} arguments, got {found}")]
    Arity {
        func: &'static str,
        expected: &'static str,
        found: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("at byte {position}: {kind}")]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EvalError {
    #[error("NaN input")]
    NaNInput,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    X,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
    Abs(Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
    /// `1` when `arg >= at`, else `0`.
    Step { at: f64, arg: Box<Expr> },
    /// `1` when `lo <= arg <= hi`, else `0`.
    Ind { lo: f64, hi: f64, arg: Box<Expr> },
    Clamp { lo: f64, hi: f64, arg: Box<Expr> },
}

impl Expr {
    fn eval(&self, x: f64) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::X => x,
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Neg(a) => -a.eval(x),
            Expr::Pow(a, n) => a.eval(x).powi(*n as i32),
            Expr::Abs(a) => a.eval(x).abs(),
            Expr::Min(a, b) => a.eval(x).min(b.eval(x)),
            Expr::Max(a, b) => a.eval(x).max(b.eval(x)),
            Expr::Step { at, arg } => indicator(arg.eval(x) >= *at),
            Expr::Ind { lo, hi, arg } => {
                let v = arg.eval(x);
                indicator(*lo <= v && v <= *hi)
            }
            Expr::Clamp { lo, hi, arg } => arg.eval(x).max(*lo).min(*hi),
        }
    }

    fn mentions_x(&self) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::X => true,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Min(a, b) | Expr::Max(a, b) => {
                a.mentions_x() || b.mentions_x()
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Abs(a) => a.mentions_x(),
            Expr::Step { arg, .. } | Expr::Ind { arg, .. } | Expr::Clamp { arg, .. } => {
                arg.mentions_x()
            }
        }
    }

    fn substitute(&self, c: &Expr) -> Expr {
        let sub = |e: &Expr| Box::new(e.substitute(c));
        match self {
            Expr::Const(v) => Expr::Const(*v),
            Expr::X => c.clone(),
            Expr::Add(a, b) => Expr::Add(sub(a), sub(b)),
            Expr::Sub(a, b) => Expr::Sub(sub(a), sub(b)),
            Expr::Mul(a, b) => Expr::Mul(sub(a), sub(b)),
            Expr::Neg(a) => Expr::Neg(sub(a)),
            Expr::Pow(a, n) => Expr::Pow(sub(a), *n),
            Expr::Abs(a) => Expr::Abs(sub(a)),
            Expr::Min(a, b) => Expr::Min(sub(a), sub(b)),
            Expr::Max(a, b) => Expr::Max(sub(a), sub(b)),
            Expr::Step { at, arg } => Expr::Step { at: *at, arg: sub(arg) },
            Expr::Ind { lo, hi, arg } => Expr::Ind {
                lo: *lo,
                hi: *hi,
                arg: sub(arg),
            },
            Expr::Clamp { lo, hi, arg } => Expr::Clamp {
                lo: *lo,
                hi: *hi,
                arg: sub(arg),
            },
        }
    }

    /// Conservative enclosure of the image of `[lo, hi]`.
    fn range(&self, lo: f64, hi: f64) -> (f64, f64) {
        match self {
            Expr::Const(c) => (*c, *c),
            Expr::X => (lo, hi),
            Expr::Add(a, b) => {
                let (a0, a1) = a.range(lo, hi);
                let (b0, b1) = b.range(lo, hi);
                (a0 + b0, a1 + b1)
            }
            Expr::Sub(a, b) => {
                let (a0, a1) = a.range(lo, hi);
                let (b0, b1) = b.range(lo, hi);
                (a0 - b1, a1 - b0)
            }
            Expr::Mul(a, b) => {
                let (a0, a1) = a.range(lo, hi);
                let (b0, b1) = b.range(lo, hi);
                let p = [a0 * b0, a0 * b1, a1 * b0, a1 * b1];
                (
                    p.iter().copied().fold(f64::INFINITY, f64::min),
                    p.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                )
            }
            Expr::Neg(a) => {
                let (a0, a1) = a.range(lo, hi);
                (-a1, -a0)
            }
            Expr::Pow(a, n) => {
                let (a0, a1) = a.range(lo, hi);
                let n = *n as i32;
                if n == 0 {
                    (1.0, 1.0)
                } else if n % 2 == 1 {
                    (a0.powi(n), a1.powi(n))
                } else if a0 <= 0.0 && a1 >= 0.0 {
                    (0.0, a0.abs().max(a1.abs()).powi(n))
                } else {
                    let (m0, m1) = (a0.abs().min(a1.abs()), a0.abs().max(a1.abs()));
                    (m0.powi(n), m1.powi(n))
                }
            }
            Expr::Abs(a) => {
                let (a0, a1) = a.range(lo, hi);
                if a0 <= 0.0 && a1 >= 0.0 {
                    (0.0, a0.abs().max(a1.abs()))
                } else {
                    (a0.abs().min(a1.abs()), a0.abs().max(a1.abs()))
                }
            }
            Expr::Min(a, b) => {
                let (a0, a1) = a.range(lo, hi);
                let (b0, b1) = b.range(lo, hi);
                (a0.min(b0), a1.min(b1))
            }
            Expr::Max(a, b) => {
                let (a0, a1) = a.range(lo, hi);
                let (b0, b1) = b.range(lo, hi);
                (a0.max(b0), a1.max(b1))
            }
            Expr::Step { .. } | Expr::Ind { .. } => (0.0, 1.0),
            Expr::Clamp { lo: c0, hi: c1, arg } => {
                let (a0, a1) = arg.range(lo, hi);
                (a0.max(*c0).min(*c1), a1.max(*c0).min(*c1))
            }
        }
    }

    fn depth(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::X => 0,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Min(a, b) | Expr::Max(a, b) => {
                1 + a.depth().max(b.depth())
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Abs(a) => 1 + a.depth(),
            Expr::Step { arg, .. } | Expr::Ind { arg, .. } | Expr::Clamp { arg, .. } => 1 + arg.depth(),
        }
    }
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn write_arg(f: &mut fmt::Formatter<'_>, arg: &Expr) -> fmt::Result {
    if matches!(arg, Expr::X) {
        Ok(())
    } else {
        write!(f, ", {arg}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if *c < 0.0 => write!(f, "(-{:?})", -c),
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::X => f.write_str("x"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Pow(a, n) => write!(f, "({a})^{n}"),
            Expr::Abs(a) => write!(f, "abs({a})"),
            Expr::Min(a, b) => write!(f, "min({a}, {b})"),
            Expr::Max(a, b) => write!(f, "max({a}, {b})"),
            Expr::Step { at, arg } => {
                write!(f, "step({}", Expr::Const(*at))?;
                write_arg(f, arg)?;
                f.write_str(")")
            }
            Expr::Ind { lo, hi, arg } => {
                write!(f, "ind({}, {}", Expr::Const(*lo), Expr::Const(*hi))?;
                write_arg(f, arg)?;
                f.write_str(")")
            }
            Expr::Clamp { lo, hi, arg } => {
                write!(f, "clamp({}, {}", Expr::Const(*lo), Expr::Const(*hi))?;
                write_arg(f, arg)?;
                f.write_str(")")
            }
        }
    }
}

/// A parsed bounded Borel function together with its source text.
#[derive(Debug, Clone, PartialEq)]
pub struct BorelExpr {
    ast: Expr,
    source: String,
}

impl BorelExpr {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let ast = Parser::new(text).parse()?;
        Ok(Self {
            ast,
            source: text.to_string(),
        })
    }

    pub fn from_ast(ast: Expr) -> Self {
        let source = ast.to_string();
        Self { ast, source }
    }

    pub fn identity() -> Self {
        Self::from_ast(Expr::X)
    }

    /// `x^n`.
    pub fn monomial(n: u32) -> Self {
        Self::from_ast(Expr::Pow(Box::new(Expr::X), n))
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        if x.is_nan() {
            return Err(EvalError::NaNInput);
        }
        Ok(self.ast.eval(x))
    }

    /// `b o c`: substitutes `c` for `x` in `self`.
    pub fn compose(&self, inner: &BorelExpr) -> BorelExpr {
        BorelExpr::from_ast(self.ast.substitute(&inner.ast))
    }

    /// An interval guaranteed to contain `b([lo, hi])`.
    pub fn bound_on(&self, lo: f64, hi: f64) -> (f64, f64) {
        self.ast.range(lo, hi)
    }

    pub fn depth(&self) -> usize {
        self.ast.depth()
    }
}

impl fmt::Display for BorelExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.ast.fmt(f)
    }
}

impl std::str::FromStr for BorelExpr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    peeked: Option<(usize, Tok)>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src,
            pos: 0,
            peeked: None,
        }
    }

    fn err(&self, position: usize, msg: impl Into<String>) -> ParseError {
        ParseError {
            position,
            kind: ParseErrorKind::Syntax(msg.into()),
        }
    }

    fn lex(&mut self) -> Result<(usize, Tok), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(self.pos) else {
            return Ok((start, Tok::End));
        };
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(t) = single {
            self.pos += 1;
            return Ok((start, t));
        }
        if c.is_ascii_digit() || c == b'.' {
            let mut end = start;
            while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
                end += 1;
            }
            if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                let mut e = end + 1;
                if e < bytes.len() && (bytes[e] == b'+' || bytes[e] == b'-') {
                    e += 1;
                }
                if e < bytes.len() && bytes[e].is_ascii_digit() {
                    while e < bytes.len() && bytes[e].is_ascii_digit() {
                        e += 1;
                    }
                    end = e;
                }
            }
            let text = &self.src[start..end];
            let value: f64 = text
                .parse()
                .map_err(|_| self.err(start, format!("invalid number `{text}`")))?;
            if !value.is_finite() {
                return Err(self.err(start, format!("number `{text}` is not finite")));
            }
            self.pos = end;
            return Ok((start, Tok::Num(value)));
        }
        if c.is_ascii_alphabetic() {
            let mut end = start;
            while end < bytes.len() && bytes[end].is_ascii_alphanumeric() {
                end += 1;
            }
            self.pos = end;
            return Ok((start, Tok::Ident(self.src[start..end].to_string())));
        }
        let ch = self.src[start..].chars().next().unwrap_or('?');
        Err(self.err(start, format!("unexpected character `{ch}`")))
    }

    fn peek(&mut self) -> Result<&(usize, Tok), ParseError> {
        if self.peeked.is_none() {
            self.peeked = Some(self.lex()?);
        }
        Ok(self.peeked.as_ref().expect("peeked"))
    }

    fn next(&mut self) -> Result<(usize, Tok), ParseError> {
        match self.peeked.take() {
            Some(t) => Ok(t),
            None => self.lex(),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        let (pos, tok) = self.next()?;
        if tok == want {
            Ok(())
        } else {
            Err(self.err(pos, format!("expected {what}")))
        }
    }

    fn parse(mut self) -> Result<Expr, ParseError> {
        if self.src.trim().is_empty() {
            return Err(self.err(0, "empty expression"));
        }
        let e = self.expr()?;
        let (pos, tok) = self.next()?;
        if tok != Tok::End {
            return Err(self.err(pos, "unexpected trailing input"));
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek()?.1 {
                Tok::Plus => {
                    self.next()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.next()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        while self.peek()?.1 == Tok::Star {
            self.next()?;
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.peek()?.1 == Tok::Minus {
            self.next()?;
            return Ok(match self.factor()? {
                Expr::Const(c) => Expr::Const(-c),
                e => Expr::Neg(Box::new(e)),
            });
        }
        let base = self.atom()?;
        if self.peek()?.1 == Tok::Caret {
            self.next()?;
            let (pos, tok) = self.next()?;
            let Tok::Num(n) = tok else {
                return Err(self.err(pos, "expected unsigned integer exponent"));
            };
            if n.fract() != 0.0 || n < 0.0 || n > u32::MAX as f64 {
                return Err(self.err(pos, "exponent must be an unsigned integer"));
            }
            return Ok(Expr::Pow(Box::new(base), n as u32));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (pos, tok) = self.next()?;
        match tok {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) if name == "x" => Ok(Expr::X),
            Tok::Ident(name) => self.call(pos, &name),
            Tok::End => Err(self.err(pos, "unexpected end of input")),
            _ => Err(self.err(pos, "expected a number, `x`, `(` or a function")),
        }
    }

    fn call(&mut self, pos: usize, name: &str) -> Result<Expr, ParseError> {
        let func: &'static str = match name {
            "abs" => "abs",
            "min" => "min",
            "max" => "max",
            "step" => "step",
            "ind" => "ind",
            "clamp" => "clamp",
            _ => return Err(self.err(pos, format!("unknown function `{name}`"))),
        };
        self.expect(Tok::LParen, "`(` after function name")?;
        let mut args = vec![(self.peek()?.0, self.expr()?)];
        loop {
            let (p, tok) = self.next()?;
            match tok {
                Tok::Comma => {
                    let at = self.peek()?.0;
                    args.push((at, self.expr()?));
                }
                Tok::RParen => break,
                _ => return Err(self.err(p, "expected `,` or `)`")),
            }
        }
        let found = args.len();
        let arity = |expected: &'static str| ParseError {
            position: pos,
            kind: ParseErrorKind::Arity {
                func,
                expected,
                found,
            },
        };
        let constant = |(at, e): (usize, Expr)| -> Result<f64, ParseError> {
            if e.mentions_x() {
                return Err(ParseError {
                    position: at,
                    kind: ParseErrorKind::Syntax(format!(
                        "`{func}` threshold arguments must be constant"
                    )),
                });
            }
            Ok(e.eval(0.0))
        };
        let mut it = args.into_iter();
        let ok = match func {
            "abs" => found == 1,
            "min" | "max" => found == 2,
            "step" => found == 1 || found == 2,
            _ => found == 2 || found == 3,
        };
        if !ok {
            return Err(arity(match func {
                "abs" => "1",
                "min" | "max" => "2",
                "step" => "1 or 2",
                _ => "2 or 3",
            }));
        }
        let mut next = || it.next().expect("arity checked");
        let e = match func {
            "abs" => Expr::Abs(Box::new(next().1)),
            "min" => Expr::Min(Box::new(next().1), Box::new(next().1)),
            "max" => Expr::Max(Box::new(next().1), Box::new(next().1)),
            "step" => {
                let at = constant(next())?;
                let arg = if found == 2 { next().1 } else { Expr::X };
                Expr::Step {
                    at,
                    arg: Box::new(arg),
                }
            }
            _ => {
                let lo = constant(next())?;
                let hi = constant(next())?;
                let arg = Box::new(if found == 3 { next().1 } else { Expr::X });
                if func == "ind" {
                    Expr::Ind { lo, hi, arg }
                } else {
                    if lo > hi {
                        return Err(self.err(pos, "clamp requires lo <= hi"));
                    }
                    Expr::Clamp { lo, hi, arg }
                }
            }
        };
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, x: f64) -> f64 {
        BorelExpr::parse(src).unwrap().eval(x).unwrap()
    }

    #[test]
    fn identity_and_polynomial() {
        assert_eq!(ev("x", 3.5), 3.5);
        assert_eq!(ev("x^2 - 1", 3.0), 8.0);
        assert_eq!(ev("-x^2", 3.0), -9.0);
        assert_eq!(ev("2*x + 1", 3.0), 7.0);
    }

    #[test]
    fn indicator_closed_ends() {
        assert_eq!(ev("ind(-1, 0)", -1.0), 1.0);
        assert_eq!(ev("ind(-1, 0)", 0.0), 1.0);
        assert_eq!(ev("ind(-1, 0)", 0.5), 0.0);
        assert_eq!(ev("step(2)", 2.0), 1.0);
        assert_eq!(ev("step(2)", 1.999), 0.0);
    }

    #[test]
    fn primitives() {
        assert_eq!(ev("min(x, 2)", 5.0), 2.0);
        assert_eq!(ev("max(x, 2)", 5.0), 5.0);
        assert_eq!(ev("(x-1)^3 + abs(x)", 2.0), 3.0);
        assert_eq!(ev("clamp(-1, 1)", 7.0), 1.0);
        assert_eq!(ev("clamp(-1, 1)", -7.0), -1.0);
        assert_eq!(ev("step(0, x^2 - 4)", 1.0), 0.0);
    }

    #[test]
    fn nan_rejected() {
        let b = BorelExpr::parse("x").unwrap();
        assert_eq!(b.eval(f64::NAN), Err(EvalError::NaNInput));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let e = BorelExpr::parse("x + * 2").unwrap_err();
        assert_eq!(e.position, 4);
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));
        assert!(BorelExpr::parse("").is_err());
        assert!(BorelExpr::parse("x / 2").is_err());
        assert!(BorelExpr::parse("sin(x)").is_err());
        assert!(BorelExpr::parse("x^1.5").is_err());
        assert!(BorelExpr::parse("(x").is_err());
        assert!(BorelExpr::parse("step(x)").is_err());
    }

    #[test]
    fn arity_errors() {
        for src in ["abs(x, 1)", "min(x)", "step()", "ind(1)", "clamp(1, 2, x, x)"] {
            match BorelExpr::parse(src) {
                Err(ParseError {
                    kind: ParseErrorKind::Arity { .. },
                    ..
                }) => {}
                Err(ParseError {
                    kind: ParseErrorKind::Syntax(_),
                    ..
                }) if src == "step()" => {}
                other => panic!("{src}: {other:?}"),
            }
        }
    }

    #[test]
    fn composition() {
        let id = BorelExpr::identity();
        let b = BorelExpr::parse("x^2 + min(x, 1)").unwrap();
        assert_eq!(id.compose(&b).eval(0.3), b.eval(0.3));
        let sq = BorelExpr::parse("x^2").unwrap();
        let shift = BorelExpr::parse("x+1").unwrap();
        assert_eq!(sq.compose(&shift).eval(2.0).unwrap(), 9.0);
        let ind = BorelExpr::parse("ind(0,1)").unwrap();
        assert_eq!(ind.compose(&sq).eval(2.0).unwrap(), 0.0);
        assert_eq!(ind.compose(&sq).eval(0.5).unwrap(), 1.0);
    }

    #[test]
    fn printed_form_reparses() {
        let b = BorelExpr::parse("ind(-1, 0.5) * clamp(-2, 2, x^3) - step(1e-3)").unwrap();
        let again = BorelExpr::parse(&b.to_string()).unwrap();
        for x in [-3.0, -1.0, 0.0, 0.001, 0.5, 2.5] {
            assert_eq!(b.eval(x), again.eval(x));
        }
    }

    #[test]
    fn bound_encloses_samples() {
        let b = BorelExpr::parse("x^2 - 3*abs(x) + ind(0, 1)").unwrap();
        let (lo, hi) = b.bound_on(-2.0, 2.0);
        for k in 0..=400 {
            let x = -2.0 + 4.0 * k as f64 / 400.0;
            let v = b.eval(x).unwrap();
            assert!(lo <= v && v <= hi);
        }
    }
}
