use super::{Builtin, Expr, Node, Var};

pub(crate) fn differentiate(e: &Expr, v: Var) -> Expr {
    if !e.depends_on(v) {
        return Expr::zero();
    }
    match e.node() {
        Node::Const(_) | Node::Param(_) => Expr::zero(),
        Node::Var(w) => {
            if *w == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Sum(ts) => Expr::add_all(ts.iter().map(|t| differentiate(t, v))),
        Node::Product(fs) => {
            let mut terms = Vec::with_capacity(fs.len());
            for (i, f) in fs.iter().enumerate() {
                let df = differentiate(f, v);
                if df.is_zero_node() {
                    continue;
                }
                let mut rest: Vec<Expr> = fs
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, g)| g.clone())
                    .collect();
                rest.push(df);
                terms.push(Expr::mul_all(rest));
            }
            Expr::add_all(terms)
        }
        Node::Pow(b, x) => {
            if !x.depends_on(v) {
                // x * b^(x-1) * b'
                let xm1 = x - &Expr::one();
                Expr::mul_all([x.clone(), b.pow(&xm1), differentiate(b, v)])
            } else {
                // b^x * (x' ln b + x b'/b)
                let t1 = differentiate(x, v) * Expr::ln(b.clone());
                let t2 = Expr::mul_all([x.clone(), differentiate(b, v), b.recip()]);
                e * &(t1 + t2)
            }
        }
        Node::Call(f, a) => {
            let da = differentiate(a, v);
            let outer = match f {
                Builtin::Exp => e.clone(),
                Builtin::Sin => Expr::cos(a.clone()),
                Builtin::Cos => Expr::sin(a.clone()).neg(),
                Builtin::Ln => a.recip(),
            };
            outer * da
        }
        Node::Apply { name, args, derivs } => {
            let mut terms = Vec::new();
            for (slot, a) in args.iter().enumerate() {
                let da = differentiate(a, v);
                if da.is_zero_node() {
                    continue;
                }
                let mut d = derivs.clone();
                d[slot] += 1;
                terms.push(Expr::apply(name, args.clone(), d) * da);
            }
            Expr::add_all(terms)
        }
    }
}
