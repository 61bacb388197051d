//! Finite coefficient space for `(xi, eta, A, B)` and the exact linear solve
//! of a determining system inside it.

use std::collections::BTreeMap;

use super::ClassifyError;
use crate::expr::{base_exp, collect_atoms, factors, Binding, Bindings, Expr, Node, Rational, Symbol, Var};
use crate::linalg::{self, Conditions};
use crate::parser::{emit_expr, PdeSpec};
use crate::poly::ParamPoly;
use crate::prolong::Generator;

pub const DEFAULT_DEGREE: u32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Unknown {
    Xi,
    Eta,
    A,
    B,
}

impl Unknown {
    pub const ALL: [Unknown; 4] = [Unknown::Xi, Unknown::Eta, Unknown::A, Unknown::B];

    pub fn name(self) -> &'static str {
        match self {
            Unknown::Xi => "xi",
            Unknown::Eta => "eta",
            Unknown::A => "A",
            Unknown::B => "B",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnsatzBasis {
    /// Maximal total degree N of the polynomial part.
    pub degree: u32,
    /// `(s, t)` pairs giving `e^(s x) cos(t y)`, `e^(s x) sin(t y)` and the
    /// swapped pair.
    pub atoms: Vec<(Rational, Rational)>,
    /// Negative powers of x or y allowed in A and B, up to the given order.
    pub laurent: Vec<(Var, u32)>,
}

impl AnsatzBasis {
    pub fn new(degree: u32, atoms: Vec<(Rational, Rational)>) -> AnsatzBasis {
        assert!(degree >= 1, "ansatz degree must be at least 1");
        AnsatzBasis {
            degree,
            atoms,
            laurent: Vec::new(),
        }
    }

    /// Basis configured from the spec: its degree and atoms, plus the
    /// negative powers of x and y appearing in its coefficients.
    pub fn for_spec(spec: &PdeSpec) -> AnsatzBasis {
        let mut b = AnsatzBasis::new(spec.degree.unwrap_or(DEFAULT_DEGREE), spec.atoms.clone());
        b.laurent = laurent_orders(spec);
        b
    }

    pub fn with_degree(mut self, n: u32) -> AnsatzBasis {
        assert!(n >= 1, "ansatz degree must be at least 1");
        self.degree = n;
        self
    }

    pub fn with_atoms(mut self, atoms: &[(Rational, Rational)]) -> AnsatzBasis {
        for a in atoms {
            if !self.atoms.contains(a) {
                self.atoms.push(a.clone());
            }
        }
        self
    }

    fn monomials(&self) -> Vec<Expr> {
        let mut out = Vec::new();
        for d in 0..=self.degree as i64 {
            for j in 0..=d {
                out.push(Expr::x().powi(d - j) * Expr::y().powi(j));
            }
        }
        out
    }

    fn polynomial_elements(&self) -> Vec<Expr> {
        let mut out = self.monomials();
        for (s, t) in &self.atoms {
            let (s, t) = (Expr::constant(s.clone()), Expr::constant(t.clone()));
            let ex = Expr::exp(&s * &Expr::x());
            let ey = Expr::exp(&s * &Expr::y());
            out.push(&ex * &Expr::cos(&t * &Expr::y()));
            out.push(&ex * &Expr::sin(&t * &Expr::y()));
            out.push(&ey * &Expr::cos(&t * &Expr::x()));
            out.push(&ey * &Expr::sin(&t * &Expr::x()));
        }
        dedup(out)
    }

    /// Elements used for `xi` and `eta`.
    pub fn field_elements(&self) -> Vec<Expr> {
        self.polynomial_elements()
    }

    /// Elements used for `A` and `B`.
    pub fn coefficient_elements(&self) -> Vec<Expr> {
        let mut out = self.polynomial_elements();
        let monos = self.monomials();
        for (v, k) in &self.laurent {
            for j in 1..=*k as i64 {
                let w = Expr::var(*v).powi(-j);
                out.extend(monos.iter().map(|p| p * &w));
            }
        }
        dedup(out)
    }

    /// Columns of the coefficient space in the fixed order `xi | eta | A | B`.
    pub fn columns(&self) -> Vec<(Unknown, Expr)> {
        let fe = self.field_elements();
        let ce = self.coefficient_elements();
        let mut out = Vec::new();
        for u in Unknown::ALL {
            let els = if matches!(u, Unknown::Xi | Unknown::Eta) {
                &fe
            } else {
                &ce
            };
            out.extend(els.iter().map(|e| (u, e.clone())));
        }
        out
    }

    pub fn describe(&self) -> String {
        let mut s = format!("polynomials of total degree <= {} in x, y", self.degree);
        for (sx, t) in &self.atoms {
            let (sx, t) = (Expr::constant(sx.clone()), Expr::constant(t.clone()));
            let ex = Expr::exp(&sx * &Expr::x());
            s.push_str(&format!(
                "; atoms {}, {} and swapped",
                emit_expr(&(&ex * &Expr::cos(&t * &Expr::y()))),
                emit_expr(&(&ex * &Expr::sin(&t * &Expr::y())))
            ));
        }
        for (v, k) in &self.laurent {
            let n = v.name();
            match k {
                1 => s.push_str(&format!("; A, B also over {n}^-1")),
                _ => s.push_str(&format!("; A, B also over {n}^-1 .. {n}^-{k}")),
            }
        }
        s
    }
}

fn dedup(v: Vec<Expr>) -> Vec<Expr> {
    let mut out: Vec<Expr> = Vec::new();
    for e in v {
        if !out.contains(&e) {
            out.push(e);
        }
    }
    out
}

/// Largest negative integer power of x and of y in the spec coefficients.
fn laurent_orders(spec: &PdeSpec) -> Vec<(Var, u32)> {
    let mut orders: BTreeMap<Var, u32> = BTreeMap::new();
    let coeffs = [&spec.a12, &spec.a22, &spec.b1, &spec.b2]
        .into_iter()
        .chain(spec.alphas.iter());
    for c in coeffs {
        for t in c.terms() {
            let (_, m) = t.split_coef();
            for f in factors(&m) {
                let (b, e) = base_exp(&f);
                if let (Node::Var(v @ (Var::X | Var::Y)), Some(n)) = (b.node(), e.as_integer()) {
                    if n < 0 {
                        let slot = orders.entry(*v).or_insert(0);
                        *slot = (*slot).max((-n) as u32);
                    }
                }
            }
        }
    }
    orders.into_iter().collect()
}

/// One parameter case of an ansatz solve.
#[derive(Clone, Debug)]
pub struct AnsatzSolution {
    pub conditions: Conditions,
    /// Basis of the solution space, one generator per coefficient vector.
    pub generators: Vec<Generator>,
    /// Coefficient vectors behind `generators`, in column order.
    pub vectors: Vec<Vec<ParamPoly>>,
    pub unresolved: Vec<ParamPoly>,
}

/// Product of the negative powers of sums and parameters in `e`.
pub(crate) fn multiplier(e: &Expr) -> Expr {
    let mut denoms: BTreeMap<Expr, i64> = BTreeMap::new();
    for t in e.terms() {
        let (_, m) = t.split_coef();
        for f in factors(&m) {
            let (b, x) = base_exp(&f);
            let Some(n) = x.as_integer() else { continue };
            if n < 0 && matches!(b.node(), Node::Sum(_) | Node::Param(_)) {
                let slot = denoms.entry(b).or_insert(0);
                *slot = (*slot).max(-n);
            }
        }
    }
    Expr::mul_all(denoms.into_iter().map(|(b, k)| b.powi(k)))
}

fn column_bindings(unknown: Unknown, element: &Expr) -> Bindings {
    Unknown::ALL
        .iter()
        .map(|u| {
            let body = if *u == unknown { element.clone() } else { Expr::zero() };
            (
                Symbol::Function(u.name().to_string()),
                Binding::Function {
                    vars: vec![Var::X, Var::Y],
                    body,
                },
            )
        })
        .collect()
}

/// Builds the generator with coefficient vector `v` over the columns.
pub fn assemble(columns: &[(Unknown, Expr)], v: &[ParamPoly]) -> Generator {
    let mut parts: BTreeMap<Unknown, Vec<Expr>> = BTreeMap::new();
    for ((u, e), c) in columns.iter().zip(v) {
        if !c.is_zero() {
            parts.entry(*u).or_default().push(c.to_expr() * e.clone());
        }
    }
    let mut get = |u| Expr::add_all(parts.remove(&u).unwrap_or_default());
    let (xi, eta, a, b) = (get(Unknown::Xi), get(Unknown::Eta), get(Unknown::A), get(Unknown::B));
    Generator::reduced(xi, eta, a, b)
}

/// Coefficient matrix of a system linear in `xi, eta, A, B` over the
/// columns: one row per (equation, independent atom).
pub fn coefficient_rows(eqs: &[Expr], columns: &[(Unknown, Expr)]) -> Vec<Vec<ParamPoly>> {
    let n = columns.len();
    let mut rows: BTreeMap<(usize, Expr), Vec<ParamPoly>> = BTreeMap::new();
    let bindings: Vec<Bindings> = columns.iter().map(|(u, e)| column_bindings(*u, e)).collect();
    for (i, eq) in eqs.iter().enumerate() {
        let mult = multiplier(eq);
        for (j, b) in bindings.iter().enumerate() {
            let v = eq.subst(b);
            if v.is_zero_node() {
                continue;
            }
            for (atom, c) in collect_atoms(&(v * mult.clone())) {
                rows.entry((i, atom)).or_insert_with(|| vec![ParamPoly::zero(); n])[j] = c;
            }
        }
    }
    rows.into_values().collect()
}

/// Solves a system linear in `xi, eta, A, B` (written with the symbols of
/// `Generator::symbolic_reduced`) inside the ansatz, branching on
/// parameter conditions.
pub fn solve_in_ansatz(
    eqs: &[Expr],
    basis: &AnsatzBasis,
    start: &Conditions,
    cap: usize,
) -> Result<Vec<AnsatzSolution>, ClassifyError> {
    let columns = basis.columns();
    let rows = coefficient_rows(eqs, &columns);
    let branches = linalg::param_null_space(&rows, columns.len(), start, cap)?;
    Ok(branches
        .into_iter()
        .map(|b| AnsatzSolution {
            generators: b.basis.iter().map(|v| assemble(&columns, v)).collect(),
            vectors: b.basis,
            conditions: b.conditions,
            unresolved: b.unresolved,
        })
        .collect())
}

/// Generator components as one string each, for reports.
pub fn component_strings(g: &Generator) -> [String; 4] {
    [
        emit_expr(&g.xi),
        emit_expr(&g.eta),
        emit_expr(&g.a()),
        emit_expr(&g.b()),
    ]
}
