use std::collections::BTreeMap;

use super::{base_exp, collect_atoms, factors, Builtin, Expr, Node};

/// Outcome of a zero test on an expression that may contain parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TriState {
    IdenticallyZero,
    Nonzero,
    /// Vanishes exactly when every listed parameter expression vanishes.
    UnknownUnderConditions(Vec<Expr>),
}

impl TriState {
    pub fn is_identically_zero(&self) -> bool {
        matches!(self, TriState::IdenticallyZero)
    }
}

/// Clears negative integer powers of sums and parameters by multiplying
/// through, so that rational expressions become polynomial numerators.
/// The result vanishes exactly where `e` does (away from poles).
pub fn together(e: &Expr) -> Expr {
    let mut current = e.clone();
    for _ in 0..8 {
        let mut denoms: BTreeMap<Expr, i64> = BTreeMap::new();
        for t in current.terms() {
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
        if denoms.is_empty() {
            return current;
        }
        let mut fs = vec![current];
        fs.extend(denoms.into_iter().map(|(b, k)| b.powi(k)));
        current = Expr::mul_all(fs);
    }
    current
}

/// Rewrites `sin(a)^n`, n >= 2, through `sin(a)^2 = 1 - cos(a)^2`, so that
/// trigonometric monomials of one argument become independent.
fn reduce_sine_powers(e: &Expr) -> Expr {
    let mut changed = false;
    let terms: Vec<Expr> = e
        .terms()
        .into_iter()
        .map(|t| {
            let (c, m) = t.split_coef();
            let mut fs = vec![Expr::constant(c)];
            for f in factors(&m) {
                let (b, x) = base_exp(&f);
                match (b.node(), x.as_integer()) {
                    (Node::Call(Builtin::Sin, a), Some(n)) if n >= 2 => {
                        changed = true;
                        let one_minus = Expr::one() - Expr::cos(a.clone()).powi(2);
                        fs.push(b.powi(n % 2));
                        fs.extend(std::iter::repeat(one_minus).take((n / 2) as usize));
                    }
                    _ => fs.push(f),
                }
            }
            Expr::mul_all(fs)
        })
        .collect();
    if changed {
        Expr::add_all(terms)
    } else {
        e.clone()
    }
}

/// Zero test treating distinct parameter-free monomials as linearly
/// independent functions, after reducing even powers of sines.
pub fn is_zero(e: &Expr) -> TriState {
    if e.is_zero_node() {
        return TriState::IdenticallyZero;
    }
    let num = reduce_sine_powers(&together(e));
    if num.is_zero_node() {
        return TriState::IdenticallyZero;
    }
    let coeffs = collect_atoms(&num);
    if coeffs.is_empty() {
        return TriState::IdenticallyZero;
    }
    let mut conds: Vec<Expr> = Vec::new();
    for c in coeffs.values() {
        if c.is_constant() {
            return TriState::Nonzero;
        }
        let p = c.primitive().to_expr();
        if !conds.contains(&p) {
            conds.push(p);
        }
    }
    conds.sort();
    TriState::UnknownUnderConditions(conds)
}
