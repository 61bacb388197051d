//! Independent checks that a generator is a point symmetry of a spec, and
//! the Lie bracket of generators.

use std::collections::BTreeMap;

use astro_float::BigFloat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::expr::{is_zero, rat, to_f64, Binding, Bindings, EvalError, Expr, NumEnv, Rational, Symbol, TriState, Var};
use crate::linalg::Conditions;
use crate::parser::PdeSpec;
use crate::prolong::{on_shell_residual, Generator};

pub const DEFAULT_PRECISION_BITS: usize = 128;
pub const PRECISION_ENV: &str = "LIESYM_PRECISION_BITS";
const MAX_RESAMPLES: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("arbitrary function `{0}` survives; the residual cannot be decided symbolically")]
    SymbolicIndeterminate(String),
    #[error("cannot evaluate numerically: {0}")]
    NotEvaluable(String),
    #[error("no admissible sample point after {MAX_RESAMPLES} resamples: {0}")]
    Domain(String),
}

/// Precision from the environment, falling back to 128 bits.
pub fn default_precision() -> usize {
    std::env::var(PRECISION_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .filter(|&b: &usize| b >= 32)
        .unwrap_or(DEFAULT_PRECISION_BITS)
}

fn param_bindings(cond: &Conditions) -> Bindings {
    cond.equalities
        .iter()
        .map(|(p, v)| (Symbol::Param(p.clone()), Binding::Value(v.to_expr())))
        .collect()
}

fn restricted(spec: &PdeSpec, g: &Generator, cond: &Conditions) -> (PdeSpec, Generator) {
    if cond.equalities.is_empty() {
        return (spec.clone(), g.clone());
    }
    let sigma: BTreeMap<String, Expr> = cond.equalities.iter().map(|(k, v)| (k.clone(), v.to_expr())).collect();
    let b = param_bindings(cond);
    (spec.subst_params(&sigma), g.map(|e| e.subst(&b)))
}

/// On-shell residual of the generator under the parameter equalities.
pub fn residual(spec: &PdeSpec, g: &Generator, cond: &Conditions) -> Expr {
    let (s, g) = restricted(spec, g, cond);
    on_shell_residual(&s, &g)
}

pub fn symbolic_residual(spec: &PdeSpec, g: &Generator, cond: &Conditions) -> Result<TriState, VerifyError> {
    if let Some(name) = spec.arbitrary_names().into_iter().next() {
        return Err(VerifyError::SymbolicIndeterminate(name));
    }
    Ok(is_zero(&residual(spec, g, cond)))
}

#[derive(Clone, Debug)]
pub struct NumericOptions {
    pub samples: usize,
    pub tol: Rational,
    pub seed: u64,
    pub precision_bits: usize,
}

impl Default for NumericOptions {
    fn default() -> Self {
        NumericOptions {
            samples: 100,
            tol: Rational::new(1.into(), num_traits::pow(num_bigint::BigInt::from(10), 25)),
            seed: 0,
            precision_bits: default_precision(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ResidualReport {
    pub symbolic: Option<TriState>,
    pub numeric_max: BigFloat,
    pub samples_used: usize,
    pub constraints_assumed: Vec<String>,
    pub tol: Rational,
    pub passed: bool,
}

impl ResidualReport {
    pub fn numeric_max_f64(&self) -> f64 {
        to_f64(&self.numeric_max)
    }
}

// Rational with |v| in [1/10, 10]; positive when `positive` is set.
fn coordinate(rng: &mut ChaCha8Rng, positive: bool) -> Rational {
    let m = rat(rng.gen_range(10..=1000), 100);
    if positive || rng.gen_bool(0.5) {
        m
    } else {
        -m
    }
}

fn jet(rng: &mut ChaCha8Rng, positive: bool) -> Rational {
    let lo = if positive { 1 } else { -200 };
    rat(rng.gen_range(lo..=200), 100)
}

fn sample_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (k as u64).wrapping_mul(0xD1B5_4A32_D192_ED03)
}

/// Random on-shell evaluation of the residual. Free parameters are drawn
/// per sample away from the zeros of the assumed inequations.
pub fn numeric_check(
    spec: &PdeSpec,
    g: &Generator,
    cond: &Conditions,
    opts: &NumericOptions,
) -> Result<ResidualReport, VerifyError> {
    let (s, g) = restricted(spec, g, cond);
    if let Some(name) = s.arbitrary_names().into_iter().next() {
        return Err(VerifyError::NotEvaluable(format!("F `{name}` is arbitrary")));
    }
    let res = on_shell_residual(&s, &g);
    if res.has_any_function() {
        return Err(VerifyError::NotEvaluable(format!(
            "undetermined function in residual {res}"
        )));
    }
    let free: Vec<String> = res.params().into_iter().collect();
    let mut env = NumEnv::new(opts.precision_bits);
    let tol = env.rational(&opts.tol);
    let mut max = BigFloat::from_i64(0, env.prec);
    for k in 0..opts.samples {
        let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(opts.seed, k));
        let mut last = String::new();
        let mut done = false;
        for attempt in 0..=MAX_RESAMPLES {
            // Later attempts stay in the positive orthant, where real powers
            // and logarithms are defined.
            let positive = attempt >= 3;
            let x = coordinate(&mut rng, positive);
            let y = coordinate(&mut rng, positive);
            let jets: Vec<Rational> = (0..5).map(|_| jet(&mut rng, positive)).collect();
            if !s.admits_point(Var::X, &x) || !s.admits_point(Var::Y, &y) || !s.admits_point(Var::U, &jets[0]) {
                last = "guarded locus".into();
                continue;
            }
            let values: BTreeMap<String, Rational> = free
                .iter()
                .map(|p| (p.clone(), rat(rng.gen_range(-12..=12), 4)))
                .collect();
            if cond
                .inequations
                .iter()
                .any(|q| q.eval(&values).is_some_and(|v| v == Rational::from_integer(0.into())))
            {
                last = "parameter on an excluded value".into();
                continue;
            }
            env.set_var(Var::X, &x);
            env.set_var(Var::Y, &y);
            for (v, q) in [Var::U, Var::Ux, Var::Uy, Var::Uxy, Var::Uyy].iter().zip(&jets) {
                env.set_var(*v, q);
            }
            for (p, q) in &values {
                env.set_param(p, q);
            }
            match env.eval(&res) {
                Ok(v) => {
                    let a = v.abs();
                    if a.cmp(&max).is_some_and(|o| o > 0) {
                        max = a;
                    }
                    done = true;
                    break;
                }
                Err(EvalError::Domain(m)) => last = m,
                Err(EvalError::Unbound(n)) => return Err(VerifyError::NotEvaluable(format!("unbound symbol `{n}`"))),
            }
        }
        if !done {
            return Err(VerifyError::Domain(last));
        }
    }
    let passed = max.cmp(&tol).is_some_and(|o| o < 0);
    Ok(ResidualReport {
        symbolic: None,
        numeric_max: max,
        samples_used: opts.samples,
        constraints_assumed: cond.describe(),
        tol: opts.tol.clone(),
        passed,
    })
}

/// Symbolic and numeric checks together; the symbolic part is omitted
/// when arbitrary functions remain.
pub fn check(
    spec: &PdeSpec,
    g: &Generator,
    cond: &Conditions,
    opts: &NumericOptions,
) -> Result<ResidualReport, VerifyError> {
    let sym = symbolic_residual(spec, g, cond).ok();
    let mut r = numeric_check(spec, g, cond, opts)?;
    r.symbolic = sym;
    Ok(r)
}

/// `[g1, g2] = g1(g2) - g2(g1)` component-wise.
pub fn bracket(g1: &Generator, g2: &Generator) -> Generator {
    let c = |a: &Expr, b: &Expr| g1.apply_to(a) - g2.apply_to(b);
    Generator::new(c(&g2.xi, &g1.xi), c(&g2.eta, &g1.eta), c(&g2.phi, &g1.phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_expr, FunctionSpec};

    fn p(s: &str) -> Expr {
        parse_expr(s).unwrap()
    }

    fn liouville() -> PdeSpec {
        PdeSpec::new(
            Expr::zero(),
            Expr::one(),
            Expr::zero(),
            Expr::zero(),
            vec![Expr::one()],
            vec![FunctionSpec::Concrete(p("exp(-u)"))],
            &[],
        )
        .unwrap()
    }

    fn gen(xi: &str, eta: &str, a: &str, b: &str) -> Generator {
        Generator::reduced(p(xi), p(eta), p(a), p(b))
    }

    #[test]
    fn liouville_quadratic_generator() {
        let g = gen("x^2 - y^2", "2*x*y", "4*x", "0");
        let s = liouville();
        assert_eq!(
            symbolic_residual(&s, &g, &Conditions::default()).unwrap(),
            TriState::IdenticallyZero
        );
        let r = numeric_check(&s, &g, &Conditions::default(), &NumericOptions::default()).unwrap();
        assert!(r.passed, "{}", r.numeric_max_f64());
    }

    #[test]
    fn zero_generator_passes() {
        let s = liouville();
        assert!(symbolic_residual(&s, &Generator::zero(), &Conditions::default())
            .unwrap()
            .is_identically_zero());
    }

    #[test]
    fn constant_shift_is_not_a_symmetry() {
        let s = liouville();
        // The residual of phi = 1 is exactly -exp(-u) times a constant.
        let g = gen("0", "0", "1", "0");
        let res = residual(&s, &g, &Conditions::default());
        assert_eq!(res, p("exp(-u)"));
        assert_eq!(
            symbolic_residual(&s, &g, &Conditions::default()).unwrap(),
            TriState::Nonzero
        );
        let g = gen("1", "0", "1", "0");
        let r = numeric_check(&s, &g, &Conditions::default(), &NumericOptions::default()).unwrap();
        assert!(!r.passed);
        assert!(r.numeric_max_f64() > 1e-5);
    }

    #[test]
    fn arbitrary_f_is_indeterminate() {
        let s = liouville().with_functions(vec![FunctionSpec::Arbitrary { name: "F".into() }]);
        assert!(matches!(
            symbolic_residual(&s, &Generator::zero(), &Conditions::default()),
            Err(VerifyError::SymbolicIndeterminate(_))
        ));
    }

    #[test]
    fn brackets() {
        let dx = gen("1", "0", "0", "0");
        let dy = gen("0", "1", "0", "0");
        let d = gen("x", "y", "0", "0");
        assert_eq!(bracket(&dx, &d), dx);
        assert!(bracket(&dy, &dx).is_zero());
        let x1 = gen("2*x*y", "y^2 - x^2", "0", "0");
        // Direct expansion: [X1, D] has xi = X1(x) - D(2xy) = 2xy - 4xy.
        assert_eq!(bracket(&x1, &d), x1.scale(&Expr::integer(-1)));
        assert_eq!(bracket(&d, &x1), x1);
    }

    #[test]
    fn numeric_check_is_seed_deterministic() {
        let s = liouville();
        let g = gen("1", "0", "1", "0");
        let o = NumericOptions {
            samples: 5,
            seed: 42,
            ..Default::default()
        };
        let a = numeric_check(&s, &g, &Conditions::default(), &o).unwrap();
        let b = numeric_check(&s, &g, &Conditions::default(), &o).unwrap();
        assert_eq!(a.numeric_max, b.numeric_max);
    }
}
