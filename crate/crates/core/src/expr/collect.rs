use std::collections::BTreeMap;

use super::{base_exp, factors, Expr, Node};
use crate::poly::{Monomial, ParamPoly};

/// Coefficients (polynomials in the parameters) of each distinct
/// parameter-free atom of an expression.
pub type Collected = BTreeMap<Expr, ParamPoly>;

/// Splits a canonical term into a parameter polynomial and the remaining
/// monomial. Only bare parameters with positive integer powers go into the
/// polynomial part.
pub fn split_param_part(term: &Expr) -> (ParamPoly, Expr) {
    let (c, m) = term.split_coef();
    let mut mono: Vec<(String, u32)> = Vec::new();
    let mut rest: Vec<Expr> = Vec::new();
    for f in factors(&m) {
        let (b, e) = base_exp(&f);
        match (b.node(), e.as_integer()) {
            (Node::Param(p), Some(n)) if n > 0 => mono.push((p.clone(), n as u32)),
            _ => rest.push(f),
        }
    }
    mono.sort();
    (ParamPoly::from_term(c, Monomial(mono)), Expr::mul_all(rest))
}

pub fn collect_atoms(e: &Expr) -> Collected {
    let mut out: Collected = BTreeMap::new();
    for t in e.terms() {
        let (p, atom) = split_param_part(&t);
        let slot = out.entry(atom.clone()).or_default();
        slot.add_assign(&p);
        if slot.is_zero() {
            out.remove(&atom);
        }
    }
    out
}
