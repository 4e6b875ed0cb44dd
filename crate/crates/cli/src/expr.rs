//! Symbol expressions: lexer, precedence-climbing parser, pretty-printer and
//! lowering to exact polynomials or numeric evaluators.
//!
//! Grammar, loosest binding first; binary operators are left-associative:
//!
//! ```text
//! sum     := product (("+" | "-") product)*
//! product := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := atom ("^" INT)?
//! atom    := INT | DECIMAL | IDENT | "gauss" "(" sum ")" | "(" sum ")"
//! ```

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use moyal_core::poly::{PolySymbol, Shape, Var};
use moyal_core::scalar::{creal, imag_unit};
use moyal_core::symbol::SymbolEvaluator;
use moyal_core::{ComplexRational, Rational};

/// Largest exponent accepted after `^`.
pub const MAX_EXPONENT: u32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    fn join(self, other: Span) -> Span {
        Span { start: self.start.min(other.start), end: self.end.max(other.end) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Block {
    X,
    Xi,
    Y,
    Eta,
}

impl Block {
    fn name(self) -> &'static str {
        match self {
            Block::X => "x",
            Block::Xi => "xi",
            Block::Y => "y",
            Block::Eta => "eta",
        }
    }
}

#[derive(Clone, Debug)]
pub enum ExprKind {
    Int(BigInt),
    /// A decimal literal, kept as written.
    Decimal(String),
    /// The imaginary unit `i`.
    Imag,
    Hbar,
    /// `axis` is the 1-based suffix, absent for `x`, `xi`, `y`, `eta`.
    Var { block: Block, axis: Option<usize> },
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Gauss(Box<Expr>),
}

#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

/// Structural equality; spans are ignored.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        use ExprKind::*;
        match (&self.kind, &other.kind) {
            (Int(a), Int(b)) => a == b,
            (Decimal(a), Decimal(b)) => a == b,
            (Imag, Imag) | (Hbar, Hbar) => true,
            (Var { block: a, axis: p }, Var { block: b, axis: q }) => a == b && p == q,
            (Neg(a), Neg(b)) | (Gauss(a), Gauss(b)) => a == b,
            (Add(a, b), Add(c, d)) | (Sub(a, b), Sub(c, d)) | (Mul(a, b), Mul(c, d)) | (Div(a, b), Div(c, d)) => {
                a == c && b == d
            }
            (Pow(a, k), Pow(b, l)) => a == b && k == l,
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExprError {
    pub message: String,
    pub span: Span,
}

impl ExprError {
    fn new(message: impl Into<String>, span: Span) -> Self {
        ExprError { message: message.into(), span }
    }

    /// The message followed by the source line and a caret marker.
    pub fn render(&self, source: &str) -> String {
        let col = source[..self.span.start.min(source.len())].chars().count();
        let width = source[self.span.start.min(source.len())..self.span.end.min(source.len())].chars().count().max(1);
        format!("{} at column {}\n  {}\n  {}{}", self.message, col + 1, source, " ".repeat(col), "^".repeat(width))
    }
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at bytes {}..{}", self.message, self.span.start, self.span.end)
    }
}

impl std::error::Error for ExprError {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Decimal(String),
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

fn describe(t: &Tok) -> String {
    match t {
        Tok::Int(n) => format!("integer {n}"),
        Tok::Decimal(s) => format!("number {s}"),
        Tok::Ident(s) => format!("identifier '{s}'"),
        Tok::Plus => "'+'".into(),
        Tok::Minus => "'-'".into(),
        Tok::Star => "'*'".into(),
        Tok::Slash => "'/'".into(),
        Tok::Caret => "'^'".into(),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::End => "end of input".into(),
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Span)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let one = |t: Tok| (t, Span { start: i, end: i + 1 });
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push(one(Tok::Plus)),
            b'-' => out.push(one(Tok::Minus)),
            b'*' => out.push(one(Tok::Star)),
            b'/' => out.push(one(Tok::Slash)),
            b'^' => out.push(one(Tok::Caret)),
            b'(' => out.push(one(Tok::LParen)),
            b')' => out.push(one(Tok::RParen)),
            b'0'..=b'9' => {
                let s = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    let frac = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    if frac == i {
                        return Err(ExprError::new("expected digits after the decimal point", Span { start: s, end: i }));
                    }
                    out.push((Tok::Decimal(src[s..i].to_string()), Span { start: s, end: i }));
                } else {
                    let n: BigInt = src[s..i].parse().expect("ascii digits");
                    out.push((Tok::Int(n), Span { start: s, end: i }));
                }
                continue;
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let s = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[s..i].to_string()), Span { start: s, end: i }));
                continue;
            }
            _ => {
                let ch = src[i..].chars().next().expect("non-empty");
                return Err(ExprError::new(format!("unexpected character '{ch}'"), Span { start: i, end: i + ch.len_utf8() }));
            }
        }
        i += 1;
    }
    out.push((Tok::End, Span { start: src.len(), end: src.len() }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> ExprError {
        ExprError::new(format!("expected {expected}, found {}", describe(self.peek())), self.span())
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ExprKind::Add as fn(Box<Expr>, Box<Expr>) -> ExprKind,
                Tok::Minus => ExprKind::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.product()?;
            let span = lhs.span.join(rhs.span);
            lhs = Expr { kind: op(Box::new(lhs), Box::new(rhs)), span };
        }
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => ExprKind::Mul as fn(Box<Expr>, Box<Expr>) -> ExprKind,
                Tok::Slash => ExprKind::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            let span = lhs.span.join(rhs.span);
            lhs = Expr { kind: op(Box::new(lhs), Box::new(rhs)), span };
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if *self.peek() == Tok::Minus {
            let (_, s) = self.bump();
            let inner = self.unary()?;
            let span = s.join(inner.span);
            return Ok(Expr { kind: ExprKind::Neg(Box::new(inner)), span });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let (tok, s) = self.bump();
        let k = match tok {
            Tok::Int(n) => n,
            Tok::Minus => return Err(ExprError::new("exponents must be non-negative integers", s)),
            other => return Err(ExprError::new(format!("expected an integer exponent, found {}", describe(&other)), s)),
        };
        let k: u32 = k
            .try_into()
            .ok()
            .filter(|&k| k <= MAX_EXPONENT)
            .ok_or_else(|| ExprError::new(format!("exponent exceeds {MAX_EXPONENT}"), s))?;
        if *self.peek() == Tok::Caret {
            return Err(ExprError::new("chained exponents need parentheses", self.span()));
        }
        let span = base.span.join(s);
        Ok(Expr { kind: ExprKind::Pow(Box::new(base), k), span })
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let (tok, s) = match self.peek() {
            Tok::Int(_) | Tok::Decimal(_) | Tok::Ident(_) | Tok::LParen => self.bump(),
            _ => return Err(self.unexpected("a number, a variable, 'gauss(' or '('")),
        };
        match tok {
            Tok::Int(n) => Ok(Expr { kind: ExprKind::Int(n), span: s }),
            Tok::Decimal(d) => Ok(Expr { kind: ExprKind::Decimal(d), span: s }),
            Tok::LParen => {
                let inner = self.sum()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.unexpected("')'"));
                }
                let (_, e) = self.bump();
                Ok(Expr { kind: inner.kind, span: s.join(e) })
            }
            Tok::Ident(name) if name == "gauss" => {
                if *self.peek() != Tok::LParen {
                    return Err(self.unexpected("'(' after gauss"));
                }
                self.bump();
                let arg = self.sum()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.unexpected("')'"));
                }
                let (_, e) = self.bump();
                Ok(Expr { kind: ExprKind::Gauss(Box::new(arg)), span: s.join(e) })
            }
            Tok::Ident(name) => identifier(&name, s),
            _ => unreachable!("filtered above"),
        }
    }
}

fn identifier(name: &str, span: Span) -> Result<Expr, ExprError> {
    let kind = match name {
        "i" => ExprKind::Imag,
        "hbar" => ExprKind::Hbar,
        _ => {
            let split = name.find(|c: char| c.is_ascii_digit()).unwrap_or(name.len());
            let (stem, digits) = name.split_at(split);
            let block = match stem {
                "x" => Block::X,
                "xi" => Block::Xi,
                "y" => Block::Y,
                "eta" => Block::Eta,
                _ => {
                    return Err(ExprError::new(
                        format!("unknown identifier '{name}' (expected x, xi, y, eta with optional axis, hbar, i or gauss)"),
                        span,
                    ))
                }
            };
            let axis = if digits.is_empty() {
                None
            } else {
                match digits.parse::<usize>() {
                    Ok(k) if k >= 1 && !digits.starts_with('0') => Some(k),
                    _ => return Err(ExprError::new(format!("invalid axis suffix in '{name}'"), span)),
                }
            };
            ExprKind::Var { block, axis }
        }
    };
    Ok(Expr { kind, span })
}

pub fn parse_symbol(text: &str) -> Result<Expr, ExprError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let e = p.sum()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(e)
}

fn precedence(e: &Expr) -> u8 {
    match e.kind {
        ExprKind::Add(..) | ExprKind::Sub(..) => 1,
        ExprKind::Mul(..) | ExprKind::Div(..) => 2,
        ExprKind::Neg(_) => 3,
        ExprKind::Pow(..) => 4,
        _ => 5,
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if precedence(e) < min {
        write!(f, "(")?;
        write_expr(f, e)?;
        write!(f, ")")
    } else {
        write_expr(f, e)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match &e.kind {
        ExprKind::Int(n) => write!(f, "{n}"),
        ExprKind::Decimal(d) => write!(f, "{d}"),
        ExprKind::Imag => write!(f, "i"),
        ExprKind::Hbar => write!(f, "hbar"),
        ExprKind::Var { block, axis } => match axis {
            Some(k) => write!(f, "{}{k}", block.name()),
            None => write!(f, "{}", block.name()),
        },
        ExprKind::Neg(a) => {
            write!(f, "-")?;
            write_at(f, a, 3)
        }
        ExprKind::Add(a, b) | ExprKind::Sub(a, b) => {
            write_at(f, a, 1)?;
            write!(f, " {} ", if matches!(e.kind, ExprKind::Add(..)) { '+' } else { '-' })?;
            write_at(f, b, 2)
        }
        ExprKind::Mul(a, b) | ExprKind::Div(a, b) => {
            write_at(f, a, 2)?;
            write!(f, " {} ", if matches!(e.kind, ExprKind::Mul(..)) { '*' } else { '/' })?;
            write_at(f, b, 3)
        }
        ExprKind::Pow(a, k) => {
            write_at(f, a, 5)?;
            write!(f, "^{k}")
        }
        ExprKind::Gauss(a) => {
            write!(f, "gauss(")?;
            write_expr(f, a)?;
            write!(f, ")")
        }
    }
}

/// Canonical text with minimal parentheses; parses back to an equal tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self)
    }
}

fn decimal_value(d: &str) -> Rational {
    let (whole, frac) = d.split_once('.').expect("decimal literal has a point");
    let numer: BigInt = format!("{whole}{frac}").parse().expect("digits");
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    Rational::new(numer, denom)
}

/// Variable blocks an expression mentions, and the largest axis suffix.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Usage {
    pub test_point: bool,
    pub hbar: bool,
    pub gauss: bool,
    pub max_axis: usize,
}

pub fn usage(e: &Expr) -> Usage {
    let mut u = Usage::default();
    fn walk(e: &Expr, u: &mut Usage) {
        match &e.kind {
            ExprKind::Hbar => u.hbar = true,
            ExprKind::Var { block, axis } => {
                if matches!(block, Block::Y | Block::Eta) {
                    u.test_point = true;
                }
                u.max_axis = u.max_axis.max(axis.unwrap_or(1));
            }
            ExprKind::Neg(a) | ExprKind::Pow(a, _) => walk(a, u),
            ExprKind::Gauss(a) => {
                u.gauss = true;
                walk(a, u)
            }
            ExprKind::Add(a, b) | ExprKind::Sub(a, b) | ExprKind::Mul(a, b) | ExprKind::Div(a, b) => {
                walk(a, u);
                walk(b, u)
            }
            _ => {}
        }
    }
    walk(e, &mut u);
    u
}

/// The smallest shape in dimension `dim` holding every variable of `e`.
pub fn required_shape(e: &Expr, dim: usize) -> Shape {
    let u = usage(e);
    Shape { dim, test_point: u.test_point, hbar: u.hbar }
}

fn resolve_var(block: Block, axis: Option<usize>, shape: Shape, span: Span) -> Result<Var, ExprError> {
    let k = match axis {
        None if shape.dim == 1 => 0,
        None => {
            return Err(ExprError::new(
                format!("'{}' needs an axis suffix 1..{} in d = {}", block.name(), shape.dim, shape.dim),
                span,
            ))
        }
        Some(k) if k <= shape.dim => k - 1,
        Some(k) => return Err(ExprError::new(format!("axis {k} exceeds d = {}", shape.dim), span)),
    };
    Ok(match block {
        Block::X => Var::X(k),
        Block::Xi => Var::Xi(k),
        Block::Y => Var::Y(k),
        Block::Eta => Var::Eta(k),
    })
}

fn constant_of(p: &PolySymbol) -> Option<ComplexRational> {
    if p.total_degree() == 0 {
        Some(p.constant_term())
    } else {
        None
    }
}

fn reciprocal(c: &ComplexRational) -> ComplexRational {
    let n = &c.re * &c.re + &c.im * &c.im;
    ComplexRational::new(&c.re / &n, -&c.im / &n)
}

/// Lower to an exact polynomial of the given shape; `gauss` is rejected.
pub fn lower_poly(e: &Expr, shape: Shape) -> Result<PolySymbol, ExprError> {
    let p = match &e.kind {
        ExprKind::Int(n) => PolySymbol::constant(shape, creal(Rational::from_integer(n.clone()))),
        ExprKind::Decimal(d) => PolySymbol::constant(shape, creal(decimal_value(d))),
        ExprKind::Imag => PolySymbol::constant(shape, imag_unit()),
        ExprKind::Hbar => PolySymbol::var(shape, Var::Hbar)
            .map_err(|_| ExprError::new("hbar is not available here", e.span))?,
        ExprKind::Var { block, axis } => {
            let v = resolve_var(*block, *axis, shape, e.span)?;
            PolySymbol::var(shape, v).map_err(|_| ExprError::new(format!("'{e}' is not available here"), e.span))?
        }
        ExprKind::Neg(a) => lower_poly(a, shape)?.scale(&creal(-Rational::one())),
        ExprKind::Add(a, b) => &lower_poly(a, shape)? + &lower_poly(b, shape)?,
        ExprKind::Sub(a, b) => &lower_poly(a, shape)? - &lower_poly(b, shape)?,
        ExprKind::Mul(a, b) => &lower_poly(a, shape)? * &lower_poly(b, shape)?,
        ExprKind::Div(a, b) => {
            let num = lower_poly(a, shape)?;
            let den = lower_poly(b, shape)?;
            let c = constant_of(&den).ok_or_else(|| ExprError::new("division is only by constants", b.span))?;
            if c.is_zero() {
                return Err(ExprError::new("division by zero", b.span));
            }
            num.scale(&reciprocal(&c))
        }
        ExprKind::Pow(a, k) => lower_poly(a, shape)?.pow(*k),
        ExprKind::Gauss(_) => {
            return Err(ExprError::new("gauss(...) has no exact polynomial form; this command needs a polynomial", e.span))
        }
    };
    Ok(p)
}

/// A sum of `polynomial × e^{−a|X|²}` terms with exact ingredients.
#[derive(Clone, Debug)]
struct Enveloped {
    terms: Vec<(PolySymbol, Option<Rational>)>,
}

impl Enveloped {
    fn poly(p: PolySymbol) -> Self {
        Enveloped { terms: vec![(p, None)] }
    }

    fn add(mut self, other: Enveloped) -> Self {
        for (p, g) in other.terms {
            match self.terms.iter_mut().find(|(_, h)| *h == g) {
                Some(slot) => slot.0 = &slot.0 + &p,
                None => self.terms.push((p, g)),
            }
        }
        self
    }

    fn scale(mut self, c: &ComplexRational) -> Self {
        for t in &mut self.terms {
            t.0 = t.0.scale(c);
        }
        self
    }

    fn mul(&self, other: &Enveloped, span: Span) -> Result<Self, ExprError> {
        let mut out = Enveloped { terms: Vec::new() };
        for (p, g) in &self.terms {
            for (q, h) in &other.terms {
                let env = match (g, h) {
                    (Some(_), Some(_)) => {
                        return Err(ExprError::new("at most one gauss factor is allowed per product term", span))
                    }
                    (Some(a), None) | (None, Some(a)) => Some(a.clone()),
                    (None, None) => None,
                };
                out = out.add(Enveloped { terms: vec![(p * q, env)] });
            }
        }
        Ok(out)
    }

    fn constant(&self) -> Option<ComplexRational> {
        match self.terms.as_slice() {
            [(p, None)] => constant_of(p),
            [] => Some(ComplexRational::zero()),
            _ => None,
        }
    }
}

fn lower_enveloped(e: &Expr, shape: Shape) -> Result<Enveloped, ExprError> {
    Ok(match &e.kind {
        ExprKind::Neg(a) => lower_enveloped(a, shape)?.scale(&creal(-Rational::one())),
        ExprKind::Add(a, b) => lower_enveloped(a, shape)?.add(lower_enveloped(b, shape)?),
        ExprKind::Sub(a, b) => lower_enveloped(a, shape)?.add(lower_enveloped(b, shape)?.scale(&creal(-Rational::one()))),
        ExprKind::Mul(a, b) => lower_enveloped(a, shape)?.mul(&lower_enveloped(b, shape)?, e.span)?,
        ExprKind::Div(a, b) => {
            let den = lower_enveloped(b, shape)?;
            let c = den.constant().ok_or_else(|| ExprError::new("division is only by constants", b.span))?;
            if c.is_zero() {
                return Err(ExprError::new("division by zero", b.span));
            }
            lower_enveloped(a, shape)?.scale(&reciprocal(&c))
        }
        ExprKind::Pow(a, k) => {
            let base = lower_enveloped(a, shape)?;
            let mut out = Enveloped::poly(PolySymbol::one(shape));
            for _ in 0..*k {
                out = out.mul(&base, e.span)?;
            }
            out
        }
        ExprKind::Gauss(arg) => {
            let a = lower_poly(arg, shape)?;
            let c = constant_of(&a)
                .filter(|c| c.im.is_zero() && c.re.is_positive())
                .ok_or_else(|| ExprError::new("gauss(a) needs a positive constant a", arg.span))?;
            Enveloped { terms: vec![(PolySymbol::one(shape), Some(c.re))] }
        }
        _ => Enveloped::poly(lower_poly(e, shape)?),
    })
}

/// Lower to a numeric evaluator on the phase plane (`d = 1`, no `y`, `eta` or `hbar`).
pub fn lower_evaluator(e: &Expr) -> Result<SymbolEvaluator, ExprError> {
    let u = usage(e);
    if u.hbar || u.test_point {
        return Err(ExprError::new(
            "numeric symbols take only x and xi; hbar is set with --hbar",
            first_offender(e).unwrap_or(e.span),
        ));
    }
    let env = lower_enveloped(e, Shape::phase(1))?;
    let mut out = SymbolEvaluator::zero();
    for (p, g) in env.terms {
        let poly = SymbolEvaluator::from_poly(&p).map_err(|err| ExprError::new(err.to_string(), e.span))?;
        out = out.add(&match g {
            None => poly,
            Some(a) => poly.mul(&SymbolEvaluator::gaussian(moyal_core::scalar::rational_to_f64(&a), (0.0, 0.0))),
        });
    }
    Ok(out)
}

fn first_offender(e: &Expr) -> Option<Span> {
    match &e.kind {
        ExprKind::Hbar => Some(e.span),
        ExprKind::Var { block: Block::Y | Block::Eta, .. } => Some(e.span),
        ExprKind::Neg(a) | ExprKind::Pow(a, _) | ExprKind::Gauss(a) => first_offender(a),
        ExprKind::Add(a, b) | ExprKind::Sub(a, b) | ExprKind::Mul(a, b) | ExprKind::Div(a, b) => {
            first_offender(a).or_else(|| first_offender(b))
        }
        _ => None,
    }
}
