use std::collections::BTreeMap;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_traits::ToPrimitive;
use thiserror::Error;

use super::{Builtin, Expr, Node, Rational, Var};

const RM: RoundingMode = RoundingMode::ToEven;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unbound symbol `{0}`")]
    Unbound(String),
}

/// High-precision evaluator holding the constants cache.
pub struct NumEnv {
    pub prec: usize,
    pub vars: BTreeMap<Var, BigFloat>,
    pub params: BTreeMap<String, BigFloat>,
    cc: Consts,
}

impl NumEnv {
    pub fn new(prec_bits: usize) -> Self {
        // A few guard words above the requested precision.
        let prec = prec_bits.max(64) + 64;
        NumEnv {
            prec,
            vars: BTreeMap::new(),
            params: BTreeMap::new(),
            cc: Consts::new().expect("constants cache"),
        }
    }

    pub fn rational(&mut self, q: &Rational) -> BigFloat {
        let n = self.bigint(q.numer());
        if q.denom() == &num_bigint::BigInt::from(1) {
            return n;
        }
        let d = self.bigint(q.denom());
        n.div(&d, self.prec, RM)
    }

    fn bigint(&mut self, n: &num_bigint::BigInt) -> BigFloat {
        match n.to_i64() {
            Some(v) => BigFloat::from_i64(v, self.prec),
            None => BigFloat::parse(&n.to_string(), Radix::Dec, self.prec, RM, &mut self.cc),
        }
    }

    pub fn set_var(&mut self, v: Var, q: &Rational) {
        let f = self.rational(q);
        self.vars.insert(v, f);
    }

    pub fn set_var_float(&mut self, v: Var, f: BigFloat) {
        self.vars.insert(v, f);
    }

    pub fn set_param(&mut self, p: &str, q: &Rational) {
        let f = self.rational(q);
        self.params.insert(p.to_string(), f);
    }

    pub fn eval(&mut self, e: &Expr) -> Result<BigFloat, EvalError> {
        let p = self.prec;
        let r = match e.node() {
            Node::Const(c) => self.rational(c),
            Node::Var(v) => self
                .vars
                .get(v)
                .cloned()
                .ok_or_else(|| EvalError::Unbound(v.name().to_string()))?,
            Node::Param(name) => self
                .params
                .get(name)
                .cloned()
                .ok_or_else(|| EvalError::Unbound(name.clone()))?,
            Node::Sum(ts) => {
                let mut acc = BigFloat::from_i64(0, p);
                for t in ts {
                    let v = self.eval(t)?;
                    acc = acc.add(&v, p, RM);
                }
                acc
            }
            Node::Product(fs) => {
                let mut acc = BigFloat::from_i64(1, p);
                for f in fs {
                    let v = self.eval(f)?;
                    acc = acc.mul(&v, p, RM);
                }
                acc
            }
            Node::Pow(b, x) => {
                let base = self.eval(b)?;
                self.pow(&base, x)?
            }
            Node::Call(f, a) => {
                let v = self.eval(a)?;
                match f {
                    Builtin::Exp => v.exp(p, RM, &mut self.cc),
                    Builtin::Sin => v.sin(p, RM, &mut self.cc),
                    Builtin::Cos => v.cos(p, RM, &mut self.cc),
                    Builtin::Ln => {
                        if !v.is_positive() || v.is_zero() {
                            return Err(EvalError::Domain("ln of nonpositive value".into()));
                        }
                        v.ln(p, RM, &mut self.cc)
                    }
                }
            }
            Node::Apply { name, .. } => return Err(EvalError::Unbound(name.clone())),
        };
        if r.is_nan() || r.is_inf() {
            return Err(EvalError::Domain(format!("non-finite value in {e}")));
        }
        Ok(r)
    }

    fn pow(&mut self, base: &BigFloat, x: &Expr) -> Result<BigFloat, EvalError> {
        let p = self.prec;
        if let Some(n) = x.as_integer() {
            return self.powi(base, n);
        }
        let ev = self.eval(x)?;
        if ev.is_int() {
            if let Some(n) = float_to_i64(&ev) {
                return self.powi(base, n);
            }
        }
        if base.is_zero() {
            return if ev.is_positive() {
                Ok(BigFloat::from_i64(0, p))
            } else {
                Err(EvalError::Domain("division by zero".into()))
            };
        }
        if base.is_negative() {
            return Err(EvalError::Domain("non-integer power of negative base".into()));
        }
        let l = base.ln(p, RM, &mut self.cc);
        Ok(l.mul(&ev, p, RM).exp(p, RM, &mut self.cc))
    }

    fn powi(&mut self, base: &BigFloat, n: i64) -> Result<BigFloat, EvalError> {
        let p = self.prec;
        if n < 0 && base.is_zero() {
            return Err(EvalError::Domain("division by zero".into()));
        }
        let v = base.powi(n.unsigned_abs() as usize, p, RM);
        Ok(if n < 0 {
            BigFloat::from_i64(1, p).div(&v, p, RM)
        } else {
            v
        })
    }
}

fn float_to_i64(f: &BigFloat) -> Option<i64> {
    let q = crate::linalg::float_to_rational(f);
    if q.is_integer() {
        q.to_integer().to_i64()
    } else {
        None
    }
}

/// Converts a float to f64 for reporting magnitudes.
pub fn to_f64(f: &BigFloat) -> f64 {
    if f.is_nan() {
        return f64::NAN;
    }
    if f.is_inf() {
        return if f.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        };
    }
    crate::linalg::float_to_rational(f).to_f64().unwrap_or(f64::NAN)
}

/// One-shot evaluation of `e` at the given rational point.
pub fn eval_numeric(
    e: &Expr,
    point: &BTreeMap<Var, Rational>,
    params: &BTreeMap<String, Rational>,
    precision_bits: usize,
) -> Result<BigFloat, EvalError> {
    let mut env = NumEnv::new(precision_bits);
    for (v, q) in point {
        env.set_var(*v, q);
    }
    for (p, q) in params {
        env.set_param(p, q);
    }
    env.eval(e)
}
