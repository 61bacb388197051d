//! Immutable symbolic expressions kept in canonical form.
//!
//! Every constructor returns a canonical expression, so structural equality
//! coincides with equality of canonical forms. The canonical form is an
//! expanded sum of products; within a product each base appears once, with
//! all exponents merged, and all `exp` factors are merged into one.

mod canon;
mod collect;
mod diff;
mod eval;
mod subst;
mod zero;

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use collect::{collect_atoms, split_param_part, Collected};
pub use eval::{eval_numeric, to_f64, EvalError, NumEnv};
pub use subst::{function_of_u, Binding, Bindings, Symbol};
pub use zero::{is_zero, together, TriState};

/// Exact rational number, always in lowest terms with positive denominator.
pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Independent variables, the dependent variable and the jet coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    Y,
    U,
    Ux,
    Uy,
    Uxx,
    Uxy,
    Uyy,
}

impl Var {
    pub const ALL: [Var; 8] = [Var::X, Var::Y, Var::U, Var::Ux, Var::Uy, Var::Uxx, Var::Uxy, Var::Uyy];

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::U => "u",
            Var::Ux => "u_x",
            Var::Uy => "u_y",
            Var::Uxx => "u_xx",
            Var::Uxy => "u_xy",
            Var::Uyy => "u_yy",
        }
    }

    pub fn from_name(s: &str) -> Option<Var> {
        Var::ALL.iter().copied().find(|v| v.name() == s)
    }

    pub fn is_jet(self) -> bool {
        !matches!(self, Var::X | Var::Y | Var::U)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Builtin {
    Exp,
    Sin,
    Cos,
    Ln,
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::Exp => "exp",
            Builtin::Sin => "sin",
            Builtin::Cos => "cos",
            Builtin::Ln => "ln",
        }
    }

    pub fn from_name(s: &str) -> Option<Builtin> {
        match s {
            "exp" => Some(Builtin::Exp),
            "sin" => Some(Builtin::Sin),
            "cos" => Some(Builtin::Cos),
            "ln" | "log" => Some(Builtin::Ln),
            _ => None,
        }
    }
}

/// Node kinds. The declaration order is the canonical order between kinds.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Const(Rational),
    Var(Var),
    Param(String),
    Pow(Expr, Expr),
    Call(Builtin, Expr),
    /// Arbitrary function `name` applied to `args`, differentiated
    /// `derivs[i]` times with respect to slot `i`.
    Apply {
        name: String,
        args: Vec<Expr>,
        derivs: Vec<u32>,
    },
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Expr(Arc<Node>);

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.0.cmp(&other.0)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::parser::emit_expr(self))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::parser::emit_expr(self))
    }
}

impl Expr {
    pub(crate) fn raw(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(c: Rational) -> Expr {
        Expr::raw(Node::Const(c))
    }

    pub fn integer(n: i64) -> Expr {
        Expr::constant(int(n))
    }

    pub fn zero() -> Expr {
        Expr::integer(0)
    }

    pub fn one() -> Expr {
        Expr::integer(1)
    }

    pub fn var(v: Var) -> Expr {
        Expr::raw(Node::Var(v))
    }

    pub fn x() -> Expr {
        Expr::var(Var::X)
    }

    pub fn y() -> Expr {
        Expr::var(Var::Y)
    }

    pub fn u() -> Expr {
        Expr::var(Var::U)
    }

    pub fn param(name: &str) -> Expr {
        Expr::raw(Node::Param(name.to_string()))
    }

    pub fn add_all<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        canon::add_all(terms.into_iter().collect())
    }

    pub fn mul_all<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        canon::mul_all(factors.into_iter().collect())
    }

    pub fn pow(&self, e: &Expr) -> Expr {
        canon::make_pow(self.clone(), e.clone())
    }

    pub fn powi(&self, n: i64) -> Expr {
        self.pow(&Expr::integer(n))
    }

    pub fn recip(&self) -> Expr {
        self.powi(-1)
    }

    pub fn call(f: Builtin, arg: Expr) -> Expr {
        canon::make_call(f, arg)
    }

    pub fn exp(arg: Expr) -> Expr {
        Expr::call(Builtin::Exp, arg)
    }

    pub fn sin(arg: Expr) -> Expr {
        Expr::call(Builtin::Sin, arg)
    }

    pub fn cos(arg: Expr) -> Expr {
        Expr::call(Builtin::Cos, arg)
    }

    pub fn ln(arg: Expr) -> Expr {
        Expr::call(Builtin::Ln, arg)
    }

    /// Arbitrary-function node with the given derivative multi-index.
    pub fn apply(name: &str, args: Vec<Expr>, derivs: Vec<u32>) -> Expr {
        assert_eq!(args.len(), derivs.len(), "derivative index arity");
        Expr::raw(Node::Apply {
            name: name.to_string(),
            args,
            derivs,
        })
    }

    /// Undifferentiated arbitrary function of the given arguments.
    pub fn func(name: &str, args: Vec<Expr>) -> Expr {
        let n = args.len();
        Expr::apply(name, args, vec![0; n])
    }

    pub fn scale(&self, c: &Rational) -> Expr {
        Expr::mul_all([Expr::constant(c.clone()), self.clone()])
    }

    pub fn neg(&self) -> Expr {
        self.scale(&int(-1))
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self.node() {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        self.as_const()
            .filter(|c| c.is_integer())
            .and_then(|c| c.to_integer().to_i64())
    }

    pub fn is_zero_node(&self) -> bool {
        self.as_const().is_some_and(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(|c| c.is_one())
    }

    /// Terms of a sum (a single-element slice for non-sums; empty for 0).
    pub fn terms(&self) -> Vec<Expr> {
        match self.node() {
            Node::Sum(ts) => ts.clone(),
            _ if self.is_zero_node() => Vec::new(),
            _ => vec![self.clone()],
        }
    }

    /// Splits a canonical term into its rational coefficient and monomial.
    pub fn split_coef(&self) -> (Rational, Expr) {
        canon::split_coef(self)
    }

    pub fn depends_on(&self, v: Var) -> bool {
        match self.node() {
            Node::Const(_) | Node::Param(_) => false,
            Node::Var(w) => *w == v,
            Node::Pow(b, e) => b.depends_on(v) || e.depends_on(v),
            Node::Call(_, a) => a.depends_on(v),
            Node::Apply { args, .. } => args.iter().any(|a| a.depends_on(v)),
            Node::Sum(xs) | Node::Product(xs) => xs.iter().any(|a| a.depends_on(v)),
        }
    }

    /// True if the expression contains any of the given variables.
    pub fn depends_on_any(&self, vs: &[Var]) -> bool {
        vs.iter().any(|v| self.depends_on(*v))
    }

    pub fn contains_param(&self, name: &str) -> bool {
        match self.node() {
            Node::Const(_) | Node::Var(_) => false,
            Node::Param(p) => p == name,
            Node::Pow(b, e) => b.contains_param(name) || e.contains_param(name),
            Node::Call(_, a) => a.contains_param(name),
            Node::Apply { args, .. } => args.iter().any(|a| a.contains_param(name)),
            Node::Sum(xs) | Node::Product(xs) => xs.iter().any(|a| a.contains_param(name)),
        }
    }

    /// True if any arbitrary-function node whose name satisfies `pred` occurs.
    pub fn contains_function(&self, pred: &dyn Fn(&str) -> bool) -> bool {
        match self.node() {
            Node::Const(_) | Node::Var(_) | Node::Param(_) => false,
            Node::Pow(b, e) => b.contains_function(pred) || e.contains_function(pred),
            Node::Call(_, a) => a.contains_function(pred),
            Node::Apply { name, args, .. } => pred(name) || args.iter().any(|a| a.contains_function(pred)),
            Node::Sum(xs) | Node::Product(xs) => xs.iter().any(|a| a.contains_function(pred)),
        }
    }

    pub fn has_any_function(&self) -> bool {
        self.contains_function(&|_| true)
    }

    /// Names of all parameters occurring in the expression, sorted.
    pub fn params(&self) -> std::collections::BTreeSet<String> {
        let mut out = std::collections::BTreeSet::new();
        self.visit_params(&mut out);
        out
    }

    fn visit_params(&self, out: &mut std::collections::BTreeSet<String>) {
        match self.node() {
            Node::Const(_) | Node::Var(_) => {}
            Node::Param(p) => {
                out.insert(p.clone());
            }
            Node::Pow(b, e) => {
                b.visit_params(out);
                e.visit_params(out);
            }
            Node::Call(_, a) => a.visit_params(out),
            Node::Apply { args, .. } => args.iter().for_each(|a| a.visit_params(out)),
            Node::Sum(xs) | Node::Product(xs) => xs.iter().for_each(|a| a.visit_params(out)),
        }
    }

    pub fn diff(&self, v: Var) -> Expr {
        diff::differentiate(self, v)
    }

    pub fn diff_n(&self, v: Var, n: u32) -> Expr {
        (0..n).fold(self.clone(), |e, _| e.diff(v))
    }

    pub fn subst(&self, b: &Bindings) -> Expr {
        subst::substitute(self, b)
    }

    pub fn subst_var(&self, v: Var, value: &Expr) -> Expr {
        let mut b = Bindings::new();
        b.insert(Symbol::Var(v), Binding::Value(value.clone()));
        self.subst(&b)
    }

    pub fn subst_param(&self, p: &str, value: &Expr) -> Expr {
        let mut b = Bindings::new();
        b.insert(Symbol::Param(p.to_string()), Binding::Value(value.clone()));
        self.subst(&b)
    }

    /// Degree as a polynomial in `v`, if the expression is one.
    pub fn poly_degree(&self, v: Var) -> Option<u32> {
        let mut deg = 0;
        for t in self.terms() {
            let (_, m) = t.split_coef();
            let mut d = 0;
            for f in canon::factors(&m) {
                let (b, e) = canon::base_exp(&f);
                if b.depends_on(v) {
                    if *b.node() != Node::Var(v) {
                        return None;
                    }
                    let n = e.as_integer().filter(|n| *n >= 0)?;
                    d += n as u32;
                } else if e.depends_on(v) {
                    return None;
                }
            }
            deg = deg.max(d);
        }
        Some(deg)
    }

    /// Coefficients of a polynomial in `v`, lowest degree first.
    pub fn poly_coeffs(&self, v: Var) -> Option<Vec<Expr>> {
        let deg = self.poly_degree(v)? as usize;
        let mut buckets: Vec<Vec<Expr>> = vec![Vec::new(); deg + 1];
        for t in self.terms() {
            let (c, m) = t.split_coef();
            let mut d = 0usize;
            let mut rest = vec![Expr::constant(c)];
            for f in canon::factors(&m) {
                let (b, e) = canon::base_exp(&f);
                if *b.node() == Node::Var(v) {
                    d += e.as_integer()? as usize;
                } else {
                    rest.push(f);
                }
            }
            buckets[d].push(Expr::mul_all(rest));
        }
        Some(buckets.into_iter().map(Expr::add_all).collect())
    }

    pub fn is_negative_const(&self) -> bool {
        self.as_const().is_some_and(|c| c.is_negative())
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add_all([self, rhs])
    }
}

impl std::ops::Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr::add_all([self.clone(), rhs.clone()])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::add_all([self, rhs.neg()])
    }
}

impl std::ops::Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        Expr::add_all([self.clone(), rhs.neg()])
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul_all([self, rhs])
    }
}

impl std::ops::Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr::mul_all([self.clone(), rhs.clone()])
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::mul_all([self, rhs.recip()])
    }
}

impl std::ops::Div for &Expr {
    type Output = Expr;
    fn div(self, rhs: &Expr) -> Expr {
        Expr::mul_all([self.clone(), rhs.recip()])
    }
}

macro_rules! mixed_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl std::ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                std::ops::$tr::$m(&self, rhs)
            }
        }
        impl std::ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                std::ops::$tr::$m(self, &rhs)
            }
        }
    )*};
}

mixed_ops!(Add add, Sub sub, Mul mul, Div div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::integer(n)
    }
}

impl From<Rational> for Expr {
    fn from(c: Rational) -> Expr {
        Expr::constant(c)
    }
}

impl From<Var> for Expr {
    fn from(v: Var) -> Expr {
        Expr::var(v)
    }
}

/// Rebuilds an expression through the canonical constructors.
pub fn normalize(e: &Expr) -> Expr {
    match e.node() {
        Node::Const(_) | Node::Var(_) | Node::Param(_) => e.clone(),
        Node::Pow(b, x) => normalize(b).pow(&normalize(x)),
        Node::Call(f, a) => Expr::call(*f, normalize(a)),
        Node::Apply { name, args, derivs } => Expr::apply(name, args.iter().map(normalize).collect(), derivs.clone()),
        Node::Sum(xs) => Expr::add_all(xs.iter().map(normalize)),
        Node::Product(xs) => Expr::mul_all(xs.iter().map(normalize)),
    }
}

pub(crate) use canon::{base_exp, factors};

#[cfg(test)]
mod tests;
