//! Text grammar for expressions, PDE specification files and generator
//! files, plus the emitter that writes expressions back in the same grammar.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Signed};
use thiserror::Error;

use crate::expr::{
    base_exp, factors, is_zero, normalize, split_param_part, Builtin, Expr, Node, Rational, TriState, Var,
};
use crate::poly::ParamPoly;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown identifier `{name}` at {line}:{col}")]
    UnknownIdentifier { name: String, line: usize, col: usize },
}

/// Which identifiers are legal in an expression.
#[derive(Clone, Debug, Default)]
pub struct ParseContext {
    pub params: BTreeSet<String>,
    pub functions: BTreeSet<String>,
    /// Accept any identifier: bare ones as parameters, applied ones as
    /// arbitrary functions. Used when re-reading emitted reports.
    pub permissive: bool,
}

impl ParseContext {
    pub fn permissive() -> Self {
        ParseContext {
            permissive: true,
            ..Default::default()
        }
    }

    pub fn with_params(params: &[&str]) -> Self {
        ParseContext {
            params: params.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Op(char),
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col0: usize,
}

struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col0: 0,
        }
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            col: self.pos - self.col0 + 1,
            msg: msg.into(),
        }
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        loop {
            while self.pos < self.src.len() && (self.src[self.pos] as char).is_whitespace() {
                if self.src[self.pos] == b'\n' {
                    self.line += 1;
                    self.col0 = self.pos + 1;
                }
                self.pos += 1;
            }
            let line = self.line;
            let col = self.pos - self.col0 + 1;
            if self.pos >= self.src.len() {
                out.push(Spanned {
                    tok: Tok::End,
                    line,
                    col,
                });
                return Ok(out);
            }
            let c = self.src[self.pos];
            let tok = if c.is_ascii_digit() || c == b'.' {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let int_part = &self.src[start..self.pos];
                let mut frac: &[u8] = &[];
                if self.pos < self.src.len() && self.src[self.pos] == b'.' {
                    self.pos += 1;
                    let fs = self.pos;
                    while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                    frac = &self.src[fs..self.pos];
                }
                if int_part.is_empty() && frac.is_empty() {
                    return Err(self.err("malformed number"));
                }
                let digits: String = int_part.iter().chain(frac.iter()).map(|b| *b as char).collect();
                let n: BigInt = digits.parse().map_err(|_| self.err("malformed number"))?;
                let d = num_traits::pow(BigInt::from(10), frac.len());
                Tok::Num(Rational::new(n, d))
            } else if c.is_ascii_alphabetic() || c == b'_' {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric()
                        || self.src[self.pos] == b'_'
                        || self.src[self.pos] == b'\'')
                {
                    self.pos += 1;
                }
                Tok::Ident(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
            } else if b"+-*/^(),[]".contains(&c) {
                self.pos += 1;
                Tok::Op(c as char)
            } else {
                // Report the character itself, which may be multi-byte.
                let rest = std::str::from_utf8(&self.src[self.pos..])
                    .ok()
                    .and_then(|s| s.chars().next())
                    .map(|ch| ch.to_string())
                    .unwrap_or_else(|| format!("byte 0x{c:02x}"));
                return Err(self.err(format!("unexpected character `{rest}`")));
            };
            out.push(Spanned { tok, line, col });
        }
    }
}

struct Parser<'c> {
    toks: Vec<Spanned>,
    pos: usize,
    ctx: &'c ParseContext,
    depth: usize,
}

// Nesting limit; deeper inputs are rejected rather than overflowing the stack.
const MAX_DEPTH: usize = 200;

impl<'c> Parser<'c> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn err_here(&self, msg: impl Into<String>) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError::Syntax {
            line: s.line,
            col: s.col,
            msg: msg.into(),
        }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if *self.peek() == Tok::Op(c) {
            self.bump();
            Ok(())
        } else if *self.peek() == Tok::End {
            Err(self.err_here(format!("expected `{c}`, found end of input")))
        } else {
            Err(self.err_here(format!("expected `{c}`")))
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.err_here("expression nested too deeply"));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Op('-') => {
                    self.bump();
                    terms.push(self.term()?.neg());
                }
                _ => break,
            }
        }
        self.depth -= 1;
        Ok(Expr::add_all(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut fs = vec![self.unary()?];
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    fs.push(self.unary()?);
                }
                Tok::Op('/') => {
                    self.bump();
                    fs.push(self.unary()?.recip());
                }
                _ => break,
            }
        }
        Ok(Expr::mul_all(fs))
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let r = if *self.peek() == Tok::Op('-') {
            self.bump();
            Ok(self.unary()?.neg())
        } else if *self.peek() == Tok::Op('+') {
            self.bump();
            self.unary()
        } else {
            self.power()
        };
        self.depth -= 1;
        r
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let e = self.unary()?;
            Ok(base.pow(&e))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (line, col) = (self.toks[self.pos].line, self.toks[self.pos].col);
        match self.bump() {
            Tok::Num(q) => Ok(Expr::constant(q)),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => self.identifier(name, line, col),
            Tok::End => {
                self.pos = self.toks.len() - 1;
                Err(self.err_here("unexpected end of input"))
            }
            Tok::Op(c) => {
                self.pos -= 1;
                Err(self.err_here(format!("unexpected `{c}`")))
            }
        }
    }

    fn identifier(&mut self, raw: String, line: usize, col: usize) -> Result<Expr, ParseError> {
        let primes = raw.chars().rev().take_while(|c| *c == '\'').count();
        let name = raw.trim_end_matches('\'').to_string();
        let mut derivs: Option<Vec<u32>> = None;
        if *self.peek() == Tok::Op('[') {
            self.bump();
            let mut ds = Vec::new();
            loop {
                match self.bump() {
                    Tok::Num(q) if q.is_integer() && !q.is_negative() => ds.push(
                        q.to_integer()
                            .try_into()
                            .map_err(|_| self.err_here("derivative order too large"))?,
                    ),
                    _ => return Err(self.err_here("expected derivative order")),
                }
                match self.bump() {
                    Tok::Op(',') => continue,
                    Tok::Op(']') => break,
                    _ => return Err(self.err_here("expected `,` or `]`")),
                }
            }
            derivs = Some(ds);
        }
        if *self.peek() == Tok::Op('(') {
            self.bump();
            let mut args = vec![self.expr()?];
            while *self.peek() == Tok::Op(',') {
                self.bump();
                args.push(self.expr()?);
            }
            self.expect(')')?;
            if let Some(f) = Builtin::from_name(&name) {
                if args.len() != 1 || derivs.is_some() || primes > 0 {
                    return Err(ParseError::Syntax {
                        line,
                        col,
                        msg: format!("`{name}` takes exactly one argument"),
                    });
                }
                return Ok(Expr::call(f, args.pop().unwrap()));
            }
            if self.ctx.permissive || self.ctx.functions.contains(&name) {
                let ds = match derivs {
                    Some(ds) if ds.len() == args.len() => ds,
                    Some(_) => {
                        return Err(ParseError::Syntax {
                            line,
                            col,
                            msg: "derivative index arity mismatch".into(),
                        })
                    }
                    None if primes > 0 && args.len() == 1 => vec![primes as u32],
                    None if primes > 0 => {
                        return Err(ParseError::Syntax {
                            line,
                            col,
                            msg: "primes only apply to one-argument functions".into(),
                        })
                    }
                    None => vec![0; args.len()],
                };
                return Ok(Expr::apply(&name, args, ds));
            }
            return Err(ParseError::UnknownIdentifier { name, line, col });
        }
        if derivs.is_some() || primes > 0 {
            return Err(ParseError::Syntax {
                line,
                col,
                msg: "derivative marker without application".into(),
            });
        }
        if let Some(v) = Var::from_name(&name) {
            return Ok(Expr::var(v));
        }
        if self.ctx.permissive || self.ctx.params.contains(&name) {
            return Ok(Expr::param(&name));
        }
        Err(ParseError::UnknownIdentifier { name, line, col })
    }
}

pub fn parse_expr_ctx(text: &str, ctx: &ParseContext) -> Result<Expr, ParseError> {
    let toks = Lexer::new(text).tokens()?;
    let mut p = Parser {
        toks,
        pos: 0,
        ctx,
        depth: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.err_here("unexpected trailing input"));
    }
    Ok(e)
}

/// Parses with every identifier accepted (bare ones become parameters).
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    parse_expr_ctx(text, &ParseContext::permissive())
}

pub fn parse_expr_with(text: &str, params: &[&str]) -> Result<Expr, ParseError> {
    parse_expr_ctx(text, &ParseContext::with_params(params))
}

// ---------------------------------------------------------------------------
// Emission

pub fn emit_expr(e: &Expr) -> String {
    match e.node() {
        Node::Sum(_) => emit_sum(e),
        _ => {
            let (neg, body) = emit_term(e);
            if neg {
                format!("-{body}")
            } else {
                body
            }
        }
    }
}

fn emit_sum(e: &Expr) -> String {
    // Group terms that share their parameter-free part, so parameter
    // coefficients print as a factor: m*x - x  ->  (m - 1)*x.
    let mut groups: Vec<(Expr, Vec<Expr>)> = Vec::new();
    for t in e.terms() {
        let (_, atom) = split_param_part(&t);
        match groups.iter_mut().find(|(a, _)| *a == atom) {
            Some((_, ts)) => ts.push(t),
            None => groups.push((atom, vec![t])),
        }
    }
    let mut pieces: Vec<(bool, String)> = Vec::new();
    for (atom, ts) in groups {
        if ts.len() == 1 || atom.is_one() {
            pieces.extend(ts.iter().map(emit_term));
        } else {
            let coef = Expr::add_all(ts.iter().map(|t| split_param_part(t).0.to_expr()));
            let at = emit_term(&atom).1;
            let text = match at.strip_prefix("1/") {
                Some(den) => format!("({})/{den}", emit_sum(&coef)),
                None => format!("({})*{at}", emit_sum(&coef)),
            };
            pieces.push((false, text));
        }
    }
    // Constant terms read best last: m - 1 rather than -1 + m.
    let (consts, mut pieces): (Vec<_>, Vec<_>) = pieces
        .into_iter()
        .partition(|(_, b)| b.chars().all(|c| c.is_ascii_digit() || c == '/'));
    pieces.extend(consts);
    let mut out = String::new();
    for (i, (neg, body)) in pieces.into_iter().enumerate() {
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        out.push_str(&body);
    }
    out
}

fn emit_rational_abs(q: &Rational) -> String {
    let a = q.abs();
    if a.is_integer() {
        a.numer().to_string()
    } else {
        format!("{}/{}", a.numer(), a.denom())
    }
}

// (is_negative, text without leading sign)
fn emit_term(t: &Expr) -> (bool, String) {
    if let Node::Const(q) = t.node() {
        return (q.is_negative(), emit_rational_abs(q));
    }
    let (c, mono) = t.split_coef();
    let mut num: Vec<String> = Vec::new();
    let mut den: Vec<String> = Vec::new();
    if !c.numer().abs().is_one() {
        num.push(c.numer().abs().to_string());
    }
    if !c.denom().is_one() {
        den.push(c.denom().to_string());
    }
    for f in factors(&mono) {
        let (b, x) = base_exp(&f);
        match x.as_const() {
            Some(q) if q.is_negative() && !matches!(b.node(), Node::Const(_)) => {
                den.push(emit_power(&b, &Expr::constant(-q)))
            }
            _ => num.push(emit_power(&b, &x)),
        }
    }
    let num_s = if num.is_empty() { "1".to_string() } else { num.join("*") };
    let text = match den.len() {
        0 => num_s,
        1 => format!("{num_s}/{}", den[0]),
        _ => format!("{num_s}/({})", den.join("*")),
    };
    (c.is_negative(), text)
}

fn emit_power(b: &Expr, x: &Expr) -> String {
    let base = emit_atom(b);
    if x.is_one() {
        return base;
    }
    let base = match b.node() {
        Node::Sum(_) | Node::Product(_) | Node::Pow(..) => format!("({base})"),
        Node::Const(q) if q.is_negative() || !q.is_integer() => format!("({base})"),
        _ => base,
    };
    let exp = match x.node() {
        Node::Const(q) if q.is_integer() && !q.is_negative() => q.numer().to_string(),
        Node::Param(p) => p.clone(),
        Node::Var(v) => v.name().to_string(),
        _ => format!("({})", emit_expr(x)),
    };
    format!("{base}^{exp}")
}

fn emit_atom(e: &Expr) -> String {
    match e.node() {
        Node::Const(q) => {
            if q.is_negative() {
                format!("-{}", emit_rational_abs(q))
            } else {
                emit_rational_abs(q)
            }
        }
        Node::Var(v) => v.name().to_string(),
        Node::Param(p) => p.clone(),
        Node::Call(f, a) => format!("{}({})", f.name(), emit_expr(a)),
        Node::Apply { name, args, derivs } => {
            let args_s: Vec<String> = args.iter().map(emit_expr).collect();
            if derivs.iter().all(|d| *d == 0) {
                format!("{name}({})", args_s.join(", "))
            } else {
                let ds: Vec<String> = derivs.iter().map(|d| d.to_string()).collect();
                format!("{name}[{}]({})", ds.join(","), args_s.join(", "))
            }
        }
        Node::Pow(b, x) => emit_power(b, x),
        Node::Sum(_) | Node::Product(_) => emit_expr(e),
    }
}

// ---------------------------------------------------------------------------
// Specification files

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("line {line}: {source}")]
    Parse { line: usize, source: ParseError },
    #[error("line {line}: malformed entry: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("missing field: {0}")]
    MissingField(String),
    #[error("alpha{0} and alpha{1} are proportional")]
    AlphaDependence(usize, usize),
    #[error("a11 normalizes to zero")]
    ZeroA11,
    #[error("at most {max} right-hand-side terms are supported, found {found}")]
    TooManyTerms { max: usize, found: usize },
}

/// Maximum number of right-hand-side terms `alpha_l F_l(u)`.
pub const MAX_TERMS: usize = 4;

/// Parametric function families with their parameter names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    /// u^m
    Power { m: String },
    /// exp(k*u)
    Exponential { k: String },
    /// exp(k*u) + c
    ShiftedExponential { k: String, c: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FunctionSpec {
    Arbitrary { name: String },
    Concrete(Expr),
    Parametric(Family),
}

impl FunctionSpec {
    /// Concrete body in `u`, if the function is not arbitrary.
    pub fn body(&self) -> Option<Expr> {
        match self {
            FunctionSpec::Arbitrary { .. } => None,
            FunctionSpec::Concrete(e) => Some(e.clone()),
            FunctionSpec::Parametric(f) => Some(match f {
                Family::Power { m } => Expr::u().pow(&Expr::param(m)),
                Family::Exponential { k } => Expr::exp(Expr::param(k) * Expr::u()),
                Family::ShiftedExponential { k, c } => Expr::exp(Expr::param(k) * Expr::u()) + Expr::param(c),
            }),
        }
    }

    pub fn is_arbitrary(&self) -> bool {
        matches!(self, FunctionSpec::Arbitrary { .. })
    }

    /// True if the concrete body is affine in `u` (second derivative zero).
    pub fn is_linear(&self) -> bool {
        match self.body() {
            Some(b) => b.diff(Var::U).diff(Var::U).is_zero_node(),
            None => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Ne,
    Gt,
    Ge,
    Lt,
    Le,
}

/// Excluded sampling locus such as `x != 0` or `u > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Guard {
    pub var: Var,
    pub cmp: Cmp,
    pub value: Rational,
}

impl Guard {
    pub fn admits(&self, v: &Rational) -> bool {
        match self.cmp {
            Cmp::Ne => v != &self.value,
            Cmp::Gt => v > &self.value,
            Cmp::Ge => v >= &self.value,
            Cmp::Lt => v < &self.value,
            Cmp::Le => v <= &self.value,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpecWarning {
    /// F_l is affine in u; classification routes to the linear case.
    LinearF(usize),
}

#[derive(Clone, Debug)]
pub struct PdeSpec {
    pub a11: Expr,
    pub a12: Expr,
    pub a22: Expr,
    pub b1: Expr,
    pub b2: Expr,
    pub alphas: Vec<Expr>,
    pub fs: Vec<FunctionSpec>,
    pub params: Vec<String>,
    pub functions: Vec<String>,
    pub atoms: Vec<(Rational, Rational)>,
    pub degree: Option<u32>,
    pub domain_text: Option<String>,
    pub guards: Vec<Guard>,
    pub warnings: Vec<SpecWarning>,
}

impl PdeSpec {
    /// Builds and validates a spec with `a11 = 1`.
    pub fn new(
        a12: Expr,
        a22: Expr,
        b1: Expr,
        b2: Expr,
        alphas: Vec<Expr>,
        fs: Vec<FunctionSpec>,
        params: &[&str],
    ) -> Result<PdeSpec, SpecError> {
        let mut spec = PdeSpec {
            a11: Expr::one(),
            a12,
            a22,
            b1,
            b2,
            alphas,
            fs,
            params: params.iter().map(|s| s.to_string()).collect(),
            functions: Vec::new(),
            atoms: Vec::new(),
            degree: None,
            domain_text: None,
            guards: Vec::new(),
            warnings: Vec::new(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn num_terms(&self) -> usize {
        self.alphas.len()
    }

    /// Left-hand operator `E[w] = w_xx + a12 w_xy + a22 w_yy + b1 w_x + b2 w_y`
    /// applied to a function of (x, y).
    pub fn operator(&self, w: &Expr) -> Expr {
        let wx = w.diff(Var::X);
        let wy = w.diff(Var::Y);
        Expr::add_all([
            self.a11.clone() * wx.diff(Var::X),
            self.a12.clone() * wx.diff(Var::Y),
            self.a22.clone() * wy.diff(Var::Y),
            self.b1.clone() * wx,
            self.b2.clone() * wy,
        ])
    }

    /// The functions F_l as expressions in u (arbitrary ones as symbols).
    pub fn f_exprs(&self) -> Vec<Expr> {
        self.fs
            .iter()
            .map(|f| match f {
                FunctionSpec::Arbitrary { name } => Expr::func(name, vec![Expr::u()]),
                other => other.body().expect("concrete"),
            })
            .collect()
    }

    pub fn arbitrary_names(&self) -> Vec<String> {
        self.fs
            .iter()
            .filter_map(|f| match f {
                FunctionSpec::Arbitrary { name } => Some(name.clone()),
                _ => None,
            })
            .collect()
    }

    /// Copy with the F_l replaced.
    pub fn with_functions(&self, fs: Vec<FunctionSpec>) -> PdeSpec {
        let mut s = self.clone();
        s.fs = fs;
        s.warnings =
            s.fs.iter()
                .enumerate()
                .filter(|(_, f)| f.is_linear())
                .map(|(i, _)| SpecWarning::LinearF(i + 1))
                .collect();
        s
    }

    /// Copy with parameters substituted everywhere.
    pub fn subst_params(&self, sigma: &BTreeMap<String, Expr>) -> PdeSpec {
        let b: crate::expr::Bindings = sigma
            .iter()
            .map(|(p, v)| {
                (
                    crate::expr::Symbol::Param(p.clone()),
                    crate::expr::Binding::Value(v.clone()),
                )
            })
            .collect();
        let mut s = self.clone();
        s.a11 = s.a11.subst(&b);
        s.a12 = s.a12.subst(&b);
        s.a22 = s.a22.subst(&b);
        s.b1 = s.b1.subst(&b);
        s.b2 = s.b2.subst(&b);
        s.alphas = s.alphas.iter().map(|a| a.subst(&b)).collect();
        s.fs =
            s.fs.iter()
                .map(|f| match f.body() {
                    Some(e) => FunctionSpec::Concrete(e.subst(&b)),
                    None => f.clone(),
                })
                .collect();
        s.params.retain(|p| !sigma.contains_key(p));
        s
    }

    pub fn admits_point(&self, var: Var, value: &Rational) -> bool {
        self.guards.iter().filter(|g| g.var == var).all(|g| g.admits(value))
    }

    fn validate(&mut self) -> Result<(), SpecError> {
        if self.alphas.is_empty() || self.alphas.len() != self.fs.len() {
            return Err(SpecError::MissingField(
                "matching alpha/F pairs (alpha1 and F1 at least)".into(),
            ));
        }
        if self.alphas.len() > MAX_TERMS {
            return Err(SpecError::TooManyTerms {
                max: MAX_TERMS,
                found: self.alphas.len(),
            });
        }
        if is_zero(&self.a11) == TriState::IdenticallyZero {
            return Err(SpecError::ZeroA11);
        }
        if !self.a11.is_one() {
            let inv = self.a11.recip();
            let scale = |e: &Expr| normalize(&(e * &inv));
            self.a12 = scale(&self.a12);
            self.a22 = scale(&self.a22);
            self.b1 = scale(&self.b1);
            self.b2 = scale(&self.b2);
            self.alphas = self.alphas.iter().map(scale).collect();
            self.a11 = Expr::one();
        }
        for i in 0..self.alphas.len() {
            for j in i + 1..self.alphas.len() {
                if proportional(&self.alphas[i], &self.alphas[j]) {
                    return Err(SpecError::AlphaDependence(i + 1, j + 1));
                }
            }
        }
        self.warnings = self
            .fs
            .iter()
            .enumerate()
            .filter(|(_, f)| f.is_linear())
            .map(|(i, _)| SpecWarning::LinearF(i + 1))
            .collect();
        Ok(())
    }
}

/// True if `a = c * b` for a nonzero rational constant `c`.
fn proportional(a: &Expr, b: &Expr) -> bool {
    let ca = crate::expr::collect_atoms(&crate::expr::together(a));
    let cb = crate::expr::collect_atoms(&crate::expr::together(b));
    if ca.is_empty() || cb.is_empty() {
        return ca.is_empty() && cb.is_empty();
    }
    if ca.keys().ne(cb.keys()) {
        // Could still be proportional after clearing different denominators.
        let ratio = normalize(&(a * &b.recip()));
        return ratio.as_const().is_some();
    }
    let mut ratio: Option<(ParamPoly, ParamPoly)> = None;
    for (k, pa) in &ca {
        let pb = &cb[k];
        match &ratio {
            None => ratio = Some((pa.clone(), pb.clone())),
            Some((ra, rb)) => {
                if !pa.mul(rb).sub(&pb.mul(ra)).is_zero() {
                    return false;
                }
            }
        }
    }
    let (ra, rb) = ratio.unwrap();
    // Proportional with a parameter-free factor only.
    match (ra.as_constant(), rb.as_constant()) {
        (Some(_), Some(_)) => true,
        _ => {
            let q = normalize(&(ra.to_expr() * rb.to_expr().recip()));
            q.as_const().is_some()
        }
    }
}

fn parse_guard(text: &str, line: usize) -> Result<Guard, SpecError> {
    let ops = [
        ("!=", Cmp::Ne),
        (">=", Cmp::Ge),
        ("<=", Cmp::Le),
        (">", Cmp::Gt),
        ("<", Cmp::Lt),
    ];
    for (sym, cmp) in ops {
        if let Some((l, r)) = text.split_once(sym) {
            let var = Var::from_name(l.trim()).ok_or_else(|| SpecError::Malformed {
                line,
                msg: format!("unknown guard variable `{}`", l.trim()),
            })?;
            let v = parse_expr_ctx(r.trim(), &ParseContext::default())
                .map_err(|source| SpecError::Parse { line, source })?;
            let value = v.as_const().cloned().ok_or_else(|| SpecError::Malformed {
                line,
                msg: "guard value must be a rational constant".into(),
            })?;
            return Ok(Guard { var, cmp, value });
        }
    }
    Err(SpecError::Malformed {
        line,
        msg: format!("cannot read guard `{text}`"),
    })
}

fn split_args(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch)
            }
            ')' => {
                depth -= 1;
                cur.push(ch)
            }
            ',' if depth == 0 => out.push(std::mem::take(&mut cur)),
            _ => cur.push(ch),
        }
    }
    if !cur.trim().is_empty() {
        out.push(cur);
    }
    out.into_iter().map(|s| s.trim().to_string()).collect()
}

fn parse_atoms(text: &str, line: usize) -> Result<Vec<(Rational, Rational)>, SpecError> {
    let mut out = Vec::new();
    for item in split_args(text) {
        let inner = item
            .strip_prefix("exp(")
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| SpecError::Malformed {
                line,
                msg: format!("atom `{item}` must read exp(s,t)"),
            })?;
        let parts = split_args(inner);
        if parts.len() != 2 {
            return Err(SpecError::Malformed {
                line,
                msg: format!("atom `{item}` needs two numbers"),
            });
        }
        let mut nums = Vec::new();
        for p in parts {
            let v = parse_expr_ctx(&p, &ParseContext::default()).map_err(|source| SpecError::Parse { line, source })?;
            nums.push(v.as_const().cloned().ok_or_else(|| SpecError::Malformed {
                line,
                msg: "atom entries must be rational".into(),
            })?);
        }
        out.push((nums[0].clone(), nums[1].clone()));
    }
    Ok(out)
}

/// Raw `key = value` entries with their line numbers.
pub fn read_entries(text: &str) -> Result<Vec<(usize, String, String)>, SpecError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (k, v) = content.split_once('=').ok_or_else(|| SpecError::Malformed {
            line,
            msg: "expected `key = value`".into(),
        })?;
        out.push((line, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn parse_function_spec(
    value: &str,
    key_name: &str,
    ctx: &ParseContext,
    line: usize,
) -> Result<FunctionSpec, SpecError> {
    let v = value.trim();
    if v == "arbitrary" {
        return Ok(FunctionSpec::Arbitrary {
            name: key_name.to_string(),
        });
    }
    let tag = |prefix: &str| -> Option<Vec<String>> {
        v.strip_prefix(prefix)
            .and_then(|s| s.strip_prefix('('))
            .and_then(|s| s.strip_suffix(')'))
            .map(split_args)
    };
    if let Some(args) = tag("arbitrary") {
        if args.len() == 1 {
            return Ok(FunctionSpec::Arbitrary { name: args[0].clone() });
        }
    }
    if let Some(args) = tag("power") {
        if args.len() == 1 {
            return Ok(FunctionSpec::Parametric(Family::Power { m: args[0].clone() }));
        }
    }
    if let Some(args) = tag("exponential") {
        if args.len() == 1 {
            return Ok(FunctionSpec::Parametric(Family::Exponential { k: args[0].clone() }));
        }
    }
    if let Some(args) = tag("shifted_exponential") {
        if args.len() == 2 {
            return Ok(FunctionSpec::Parametric(Family::ShiftedExponential {
                k: args[0].clone(),
                c: args[1].clone(),
            }));
        }
    }
    let e = parse_expr_ctx(v, ctx).map_err(|source| SpecError::Parse { line, source })?;
    Ok(FunctionSpec::Concrete(e))
}

pub fn parse_spec(text: &str) -> Result<PdeSpec, SpecError> {
    let entries = read_entries(text)?;
    let mut ctx = ParseContext::default();
    for (line, k, v) in &entries {
        match k.as_str() {
            "params" => ctx.params.extend(split_args(v)),
            "functions" => ctx.functions.extend(split_args(v)),
            "a11" | "a12" | "a22" | "b1" | "b2" | "atoms" | "degree" | "domain" => {}
            _ if k.starts_with("alpha") || k.starts_with('F') => {}
            _ => {
                return Err(SpecError::Malformed {
                    line: *line,
                    msg: format!("unknown key `{k}`"),
                })
            }
        }
    }
    let parse = |line: usize, v: &str| parse_expr_ctx(v, &ctx).map_err(|source| SpecError::Parse { line, source });
    let mut coeffs: BTreeMap<&str, Expr> = BTreeMap::new();
    let mut alphas: BTreeMap<usize, Expr> = BTreeMap::new();
    let mut fs: BTreeMap<usize, FunctionSpec> = BTreeMap::new();
    let mut atoms = Vec::new();
    let mut degree = None;
    let mut domain_text = None;
    let mut guards = Vec::new();
    for (line, k, v) in &entries {
        let line = *line;
        match k.as_str() {
            "a11" | "a12" | "a22" | "b1" | "b2" => {
                let key: &str = match k.as_str() {
                    "a11" => "a11",
                    "a12" => "a12",
                    "a22" => "a22",
                    "b1" => "b1",
                    _ => "b2",
                };
                coeffs.insert(key, parse(line, v)?);
            }
            "atoms" => atoms = parse_atoms(v, line)?,
            "degree" => {
                degree = Some(v.parse::<u32>().map_err(|_| SpecError::Malformed {
                    line,
                    msg: "degree must be a positive integer".into(),
                })?)
            }
            "domain" => {
                domain_text = Some(v.clone());
                for g in split_args(v) {
                    guards.push(parse_guard(&g, line)?);
                }
            }
            "params" | "functions" => {}
            _ => {
                let (prefix, idx) = if let Some(rest) = k.strip_prefix("alpha") {
                    ("alpha", rest)
                } else {
                    ("F", &k[1..])
                };
                let n: usize = idx.parse().map_err(|_| SpecError::Malformed {
                    line,
                    msg: format!("bad index in key `{k}`"),
                })?;
                if n == 0 {
                    return Err(SpecError::Malformed {
                        line,
                        msg: "indices start at 1".into(),
                    });
                }
                if prefix == "alpha" {
                    alphas.insert(n, parse(line, v)?);
                } else {
                    fs.insert(n, parse_function_spec(v, k, &ctx, line)?);
                }
            }
        }
    }
    let len = alphas.len().max(fs.len());
    if len == 0 {
        return Err(SpecError::MissingField("alpha1/F1".into()));
    }
    for i in 1..=len {
        if !alphas.contains_key(&i) {
            return Err(SpecError::MissingField(format!("alpha{i}")));
        }
        if !fs.contains_key(&i) {
            return Err(SpecError::MissingField(format!("F{i}")));
        }
    }
    let get = |k: &str, default: i64| coeffs.get(k).cloned().unwrap_or(Expr::integer(default));
    let mut spec = PdeSpec {
        a11: get("a11", 1),
        a12: get("a12", 0),
        a22: get("a22", 0),
        b1: get("b1", 0),
        b2: get("b2", 0),
        alphas: alphas.into_values().collect(),
        fs: fs.into_values().collect(),
        params: ctx.params.iter().cloned().collect(),
        functions: ctx.functions.iter().cloned().collect(),
        atoms,
        degree,
        domain_text,
        guards,
        warnings: Vec::new(),
    };
    for f in &spec.fs {
        if let FunctionSpec::Parametric(fam) = f {
            let names: Vec<&String> = match fam {
                Family::Power { m } => vec![m],
                Family::Exponential { k } => vec![k],
                Family::ShiftedExponential { k, c } => vec![k, c],
            };
            for n in names {
                if !spec.params.contains(n) {
                    spec.params.push(n.clone());
                }
            }
        }
    }
    spec.params.sort();
    spec.validate()?;
    Ok(spec)
}

/// Generator file: keys `xi`, `eta` and either `A`/`B` or `phi`, plus
/// optional `params`/`functions` declarations.
pub fn parse_generator_file(text: &str, extra: &ParseContext) -> Result<crate::prolong::Generator, SpecError> {
    let entries = read_entries(text)?;
    let mut ctx = extra.clone();
    for (_, k, v) in &entries {
        match k.as_str() {
            "params" => ctx.params.extend(split_args(v)),
            "functions" => ctx.functions.extend(split_args(v)),
            _ => {}
        }
    }
    let mut vals: BTreeMap<String, Expr> = BTreeMap::new();
    for (line, k, v) in &entries {
        match k.as_str() {
            "params" | "functions" => {}
            "xi" | "eta" | "A" | "B" | "phi" => {
                let e = parse_expr_ctx(v, &ctx).map_err(|source| SpecError::Parse { line: *line, source })?;
                vals.insert(k.clone(), e);
            }
            _ => {
                return Err(SpecError::Malformed {
                    line: *line,
                    msg: format!("unknown generator key `{k}`"),
                })
            }
        }
    }
    let g = |k: &str| vals.get(k).cloned().unwrap_or_else(Expr::zero);
    if vals.contains_key("phi") {
        Ok(crate::prolong::Generator::new(g("xi"), g("eta"), g("phi")))
    } else {
        Ok(crate::prolong::Generator::reduced(g("xi"), g("eta"), g("A"), g("B")))
    }
}

/// Emits a generator in the generator-file format.
pub fn emit_generator_file(g: &crate::prolong::Generator) -> String {
    if g.is_reduced() {
        return format!(
            "xi = {}\neta = {}\nA = {}\nB = {}\n",
            emit_expr(&g.xi),
            emit_expr(&g.eta),
            emit_expr(&g.a()),
            emit_expr(&g.b())
        );
    }
    format!(
        "xi = {}\neta = {}\nphi = {}\n",
        emit_expr(&g.xi),
        emit_expr(&g.eta),
        emit_expr(&g.phi)
    )
}
