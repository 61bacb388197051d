use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{int, Builtin, Expr, Node, Rational};

// Positive integer powers of sums above this are kept as atoms.
const MAX_EXPAND_POWER: i64 = 12;

pub(crate) fn split_coef(e: &Expr) -> (Rational, Expr) {
    match e.node() {
        Node::Const(c) => (c.clone(), Expr::one()),
        Node::Product(fs) => {
            if let Node::Const(c) = fs[0].node() {
                let rest = &fs[1..];
                let mono = if rest.len() == 1 {
                    rest[0].clone()
                } else {
                    Expr::raw(Node::Product(rest.to_vec()))
                };
                (c.clone(), mono)
            } else {
                (int(1), e.clone())
            }
        }
        _ => (int(1), e.clone()),
    }
}

/// Non-constant factors of a canonical monomial.
pub(crate) fn factors(m: &Expr) -> Vec<Expr> {
    match m.node() {
        Node::Const(_) => Vec::new(),
        Node::Product(fs) => fs
            .iter()
            .filter(|f| !matches!(f.node(), Node::Const(_)))
            .cloned()
            .collect(),
        _ => vec![m.clone()],
    }
}

pub(crate) fn base_exp(f: &Expr) -> (Expr, Expr) {
    match f.node() {
        Node::Pow(b, e) => (b.clone(), e.clone()),
        _ => (f.clone(), Expr::one()),
    }
}

fn make_term(c: Rational, mono: Expr) -> Expr {
    if c.is_zero() {
        return Expr::zero();
    }
    if mono.is_one() {
        return Expr::constant(c);
    }
    if c.is_one() {
        return mono;
    }
    let mut fs = vec![Expr::constant(c)];
    match mono.node() {
        Node::Product(xs) => fs.extend(xs.iter().cloned()),
        _ => fs.push(mono),
    }
    Expr::raw(Node::Product(fs))
}

pub(crate) fn add_all(terms: Vec<Expr>) -> Expr {
    let mut acc: BTreeMap<Expr, Rational> = BTreeMap::new();
    let push = |t: &Expr, acc: &mut BTreeMap<Expr, Rational>| {
        let (c, m) = split_coef(t);
        if c.is_zero() {
            return;
        }
        let slot = acc.entry(m).or_insert_with(Rational::zero);
        *slot += c;
    };
    for t in &terms {
        match t.node() {
            Node::Sum(xs) => xs.iter().for_each(|x| push(x, &mut acc)),
            _ => push(t, &mut acc),
        }
    }
    let out: Vec<Expr> = acc
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(m, c)| make_term(c, m))
        .collect();
    match out.len() {
        0 => Expr::zero(),
        1 => out.into_iter().next().unwrap(),
        _ => Expr::raw(Node::Sum(out)),
    }
}

pub(crate) fn mul_all(factors_in: Vec<Expr>) -> Expr {
    let mut flat = Vec::with_capacity(factors_in.len());
    for f in factors_in {
        match f.node() {
            Node::Product(xs) => flat.extend(xs.iter().cloned()),
            _ => flat.push(f),
        }
    }
    if flat.iter().any(|f| f.is_zero_node()) {
        return Expr::zero();
    }
    let (sums, atoms): (Vec<Expr>, Vec<Expr>) = flat.into_iter().partition(|f| matches!(f.node(), Node::Sum(_)));
    let head = mul_atoms(atoms);
    if sums.is_empty() {
        return head;
    }
    let mut acc: Vec<Expr> = head.terms();
    for s in sums {
        let ts = s.terms();
        let mut next = Vec::with_capacity(acc.len() * ts.len());
        for a in &acc {
            for t in &ts {
                next.push(mul_atoms(vec![a.clone(), t.clone()]));
            }
        }
        acc = next;
    }
    add_all(acc)
}

// Product of factors none of which is a sum.
fn mul_atoms(fs: Vec<Expr>) -> Expr {
    let mut coef = int(1);
    let mut bases: BTreeMap<Expr, Vec<Expr>> = BTreeMap::new();
    let mut exp_args: Vec<Expr> = Vec::new();
    let mut stack = fs;
    while let Some(f) = stack.pop() {
        match f.node() {
            Node::Const(c) => coef *= c,
            Node::Product(xs) => stack.extend(xs.iter().cloned()),
            Node::Call(Builtin::Exp, a) => exp_args.push(a.clone()),
            Node::Pow(b, e) => bases.entry(b.clone()).or_default().push(e.clone()),
            _ => bases.entry(f.clone()).or_default().push(Expr::one()),
        }
    }
    if coef.is_zero() {
        return Expr::zero();
    }
    let mut out: Vec<Expr> = Vec::new();
    let mut redo = false;
    for (b, es) in bases {
        let e = add_all(es);
        if e.is_zero_node() {
            continue;
        }
        let p = make_pow(b, e);
        match p.node() {
            Node::Const(c) => coef *= c,
            Node::Product(_) | Node::Sum(_) | Node::Call(Builtin::Exp, _) => {
                redo = true;
                out.push(p);
            }
            _ => out.push(p),
        }
    }
    if !exp_args.is_empty() {
        let a = add_all(exp_args);
        if !a.is_zero_node() {
            out.push(Expr::raw(Node::Call(Builtin::Exp, a)));
        }
    }
    if coef.is_zero() {
        return Expr::zero();
    }
    if redo {
        out.push(Expr::constant(coef));
        return mul_all(out);
    }
    out.sort();
    if out.is_empty() {
        return Expr::constant(coef);
    }
    if out.len() == 1 && coef.is_one() {
        return out.pop().unwrap();
    }
    let mut fs = Vec::with_capacity(out.len() + 1);
    if !coef.is_one() {
        fs.push(Expr::constant(coef));
    }
    fs.extend(out);
    Expr::raw(Node::Product(fs))
}

fn rational_powi(c: &Rational, n: i64) -> Option<Rational> {
    if c.is_zero() && n < 0 {
        return None;
    }
    let m = n.unsigned_abs() as usize;
    let num = num_traits::pow(c.numer().clone(), m);
    let den = num_traits::pow(c.denom().clone(), m);
    let r = Rational::new(num, den);
    Some(if n < 0 { r.recip() } else { r })
}

// Exact q-th root of a positive rational, if it exists.
fn rational_root(c: &Rational, q: u32) -> Option<Rational> {
    fn iroot(n: &BigInt, q: u32) -> Option<BigInt> {
        let r = n.nth_root(q);
        if num_traits::pow(r.clone(), q as usize) == *n {
            Some(r)
        } else {
            None
        }
    }
    if !c.is_positive() {
        return None;
    }
    Some(Rational::new(iroot(c.numer(), q)?, iroot(c.denom(), q)?))
}

pub(crate) fn make_pow(b: Expr, e: Expr) -> Expr {
    if e.is_zero_node() || b.is_one() {
        return Expr::one();
    }
    if e.is_one() {
        return b;
    }
    let e_int = e.as_integer();
    match b.node() {
        Node::Const(c) => {
            if let Some(n) = e_int {
                if let Some(r) = rational_powi(c, n) {
                    return Expr::constant(r);
                }
            } else if let Some(q) = e.as_const() {
                if c.is_zero() && q.is_positive() {
                    return Expr::zero();
                }
                // Perfect rational roots of positive bases evaluate exactly.
                if let Some(den) = q.denom().to_u32() {
                    if den <= 16 {
                        if let Some(root) = rational_root(c, den) {
                            let n = q.numer().to_i64().unwrap_or(0);
                            if let Some(r) = rational_powi(&root, n) {
                                return Expr::constant(r);
                            }
                        }
                    }
                }
            }
            Expr::raw(Node::Pow(b, e))
        }
        Node::Call(Builtin::Exp, a) => make_call(Builtin::Exp, mul_all(vec![a.clone(), e])),
        Node::Pow(b2, e2) => {
            if e_int.is_some() {
                make_pow(b2.clone(), mul_all(vec![e2.clone(), e]))
            } else {
                Expr::raw(Node::Pow(b, e))
            }
        }
        Node::Product(fs) => {
            if e_int.is_some() {
                mul_all(fs.iter().map(|f| make_pow(f.clone(), e.clone())).collect())
            } else {
                Expr::raw(Node::Pow(b, e))
            }
        }
        Node::Sum(ts) => match e_int {
            Some(n) if n > 0 && n <= MAX_EXPAND_POWER => {
                let mut acc = Expr::one();
                for _ in 0..n {
                    acc = mul_all(vec![acc, b.clone()]);
                }
                acc
            }
            Some(n) => {
                // Make the sum primitive so that equal denominators share a base.
                let (c0, _) = split_coef(&ts[0]);
                let content = ts
                    .iter()
                    .map(|t| split_coef(t).0)
                    .fold(Rational::zero(), |g, c| gcd_rat(&g, &c));
                let content = if c0.is_negative() { -content } else { content };
                if content.is_one() {
                    Expr::raw(Node::Pow(b, e))
                } else {
                    let inv = content.recip();
                    let prim = add_all(
                        ts.iter()
                            .map(|t| mul_all(vec![Expr::constant(inv.clone()), t.clone()]))
                            .collect(),
                    );
                    let cpow = rational_powi(&content, n).expect("nonzero content");
                    mul_all(vec![Expr::constant(cpow), Expr::raw(Node::Pow(prim, e))])
                }
            }
            None => Expr::raw(Node::Pow(b, e)),
        },
        _ => Expr::raw(Node::Pow(b, e)),
    }
}

fn gcd_rat(a: &Rational, b: &Rational) -> Rational {
    if a.is_zero() {
        return b.abs();
    }
    if b.is_zero() {
        return a.abs();
    }
    let num = a.numer().gcd(b.numer());
    let den = a.denom().lcm(b.denom());
    Rational::new(num, den)
}

pub(crate) fn make_call(f: Builtin, a: Expr) -> Expr {
    match f {
        Builtin::Exp if a.is_zero_node() => Expr::one(),
        Builtin::Sin if a.is_zero_node() => Expr::zero(),
        Builtin::Cos if a.is_zero_node() => Expr::one(),
        Builtin::Ln if a.is_one() => Expr::zero(),
        _ => Expr::raw(Node::Call(f, a)),
    }
}
