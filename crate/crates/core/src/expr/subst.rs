use std::collections::BTreeMap;

use super::{Expr, Node, Var};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Var(Var),
    Param(String),
    Function(String),
}

#[derive(Clone, Debug)]
pub enum Binding {
    Value(Expr),
    /// Concrete body for an arbitrary function, written in the placeholder
    /// variables `vars` (one per argument slot).
    Function {
        vars: Vec<Var>,
        body: Expr,
    },
}

pub type Bindings = BTreeMap<Symbol, Binding>;

/// Convenience: bind a one-argument arbitrary function to a body in `u`.
pub fn function_of_u(body: Expr) -> Binding {
    Binding::Function {
        vars: vec![Var::U],
        body,
    }
}

pub(crate) fn substitute(e: &Expr, b: &Bindings) -> Expr {
    if b.is_empty() {
        return e.clone();
    }
    match e.node() {
        Node::Const(_) => e.clone(),
        Node::Var(v) => match b.get(&Symbol::Var(*v)) {
            Some(Binding::Value(x)) => x.clone(),
            _ => e.clone(),
        },
        Node::Param(p) => match b.get(&Symbol::Param(p.clone())) {
            Some(Binding::Value(x)) => x.clone(),
            _ => e.clone(),
        },
        Node::Pow(base, x) => substitute(base, b).pow(&substitute(x, b)),
        Node::Call(f, a) => Expr::call(*f, substitute(a, b)),
        Node::Sum(ts) => Expr::add_all(ts.iter().map(|t| substitute(t, b))),
        Node::Product(fs) => Expr::mul_all(fs.iter().map(|f| substitute(f, b))),
        Node::Apply { name, args, derivs } => {
            let new_args: Vec<Expr> = args.iter().map(|a| substitute(a, b)).collect();
            match b.get(&Symbol::Function(name.clone())) {
                Some(Binding::Function { vars, body }) => {
                    assert_eq!(vars.len(), args.len(), "arity of binding for {name}");
                    let mut d = body.clone();
                    for (v, n) in vars.iter().zip(derivs) {
                        d = d.diff_n(*v, *n);
                    }
                    let inner: Bindings = vars
                        .iter()
                        .zip(new_args)
                        .map(|(v, a)| (Symbol::Var(*v), Binding::Value(a)))
                        .collect();
                    substitute(&d, &inner)
                }
                Some(Binding::Value(x)) if derivs.iter().all(|n| *n == 0) => x.clone(),
                _ => Expr::apply(name, new_args, derivs.clone()),
            }
        }
    }
}
