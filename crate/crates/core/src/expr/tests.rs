use std::collections::BTreeMap;

use proptest::prelude::*;

use super::*;
use crate::expr::eval::to_f64;
use crate::parser::{emit_expr, parse_expr, parse_expr_with};

fn p(s: &str) -> Expr {
    parse_expr(s).unwrap()
}

#[test]
fn power_rule_with_symbolic_exponent() {
    assert_eq!(p("x^r").diff(Var::X), p("r*x^(r-1)"));
}

#[test]
fn chain_rule_through_exp() {
    assert_eq!(p("exp(-u)").diff(Var::U), p("-exp(-u)"));
}

#[test]
fn arbitrary_function_derivative_bump() {
    let f = Expr::func("F", vec![Expr::u()]);
    let e = &f * &Expr::x();
    assert_eq!(e.diff(Var::U), f.diff(Var::U) * Expr::x());
    assert_eq!(emit_expr(&e.diff(Var::U)), "x*F[1](u)");
}

#[test]
fn normalize_examples() {
    assert_eq!(p("u*x + x*u"), p("2*x*u"));
    assert_eq!(p("x^2 * x^(-2)"), Expr::one());
    assert_eq!(p("exp(2*x)*exp(-x)"), p("exp(x)"));
    assert_eq!(normalize(&p("exp(2*x)*exp(-x)")), p("exp(x)"));
    assert_eq!(p("x^r*x^s"), p("x^(r+s)"));
}

#[test]
fn substitute_function_binding() {
    let fp = Expr::func("F", vec![Expr::u()]).diff(Var::U);
    let b: Bindings = [(
        Symbol::Function("F".into()),
        Binding::Function {
            vars: vec![Var::U],
            body: p("u^m"),
        },
    )]
    .into();
    assert_eq!(fp.subst(&b), p("m*u^(m-1)"));
}

#[test]
fn substitute_alpha_derivative() {
    let alpha = Expr::func("alpha", vec![Expr::x(), Expr::y()]);
    let b: Bindings = [(
        Symbol::Function("alpha".into()),
        Binding::Function {
            vars: vec![Var::X, Var::Y],
            body: p("exp(2*x)"),
        },
    )]
    .into();
    assert_eq!(alpha.diff(Var::X).subst(&b), p("2*exp(2*x)"));
}

#[test]
fn substitute_values() {
    let e = p("x*y").subst_var(Var::X, &Expr::integer(3));
    let e = e.subst_var(Var::Y, &Expr::constant(rat(1, 2)));
    assert_eq!(e, Expr::constant(rat(3, 2)));
}

#[test]
fn numeric_examples() {
    let pt: BTreeMap<Var, Rational> = [(Var::X, int(2)), (Var::Y, int(1))].into();
    let v = eval_numeric(&p("x^2+y"), &pt, &BTreeMap::new(), 128).unwrap();
    assert_eq!(to_f64(&v), 5.0);
    let pt: BTreeMap<Var, Rational> = [(Var::U, int(0))].into();
    let v = eval_numeric(&p("exp(-u)"), &pt, &BTreeMap::new(), 128).unwrap();
    assert_eq!(to_f64(&v), 1.0);
    let pt: BTreeMap<Var, Rational> = [(Var::X, int(0))].into();
    let e = eval_numeric(&p("x^(-2)"), &pt, &BTreeMap::new(), 128);
    assert!(matches!(e, Err(EvalError::Domain(_))));
    let pt: BTreeMap<Var, Rational> = [(Var::U, int(-1))].into();
    assert!(matches!(
        eval_numeric(&p("ln(u)"), &pt, &BTreeMap::new(), 128),
        Err(EvalError::Domain(_))
    ));
    assert!(matches!(
        eval_numeric(&p("u^(1/2)"), &pt, &BTreeMap::new(), 128),
        Err(EvalError::Domain(_))
    ));
}

#[test]
fn zero_test_examples() {
    assert_eq!(is_zero(&p("x - x")), TriState::IdenticallyZero);
    let e = parse_expr_with("(r+2)*x^r", &["r"]).unwrap();
    match is_zero(&e) {
        TriState::UnknownUnderConditions(c) => {
            assert_eq!(c, vec![parse_expr_with("r+2", &["r"]).unwrap()])
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(is_zero(&p("x^2+1")), TriState::Nonzero);
    // Rational expressions are cleared of denominators first.
    assert_eq!(is_zero(&p("1/(x+1) - 1/(1+x)")), TriState::IdenticallyZero);
}

#[test]
fn pythagorean_identity_is_recognised() {
    assert_eq!(is_zero(&p("sin(x)^2 + cos(x)^2 - 1")), TriState::IdenticallyZero);
    assert_eq!(is_zero(&p("sin(y)^4 - (1 - cos(y)^2)^2")), TriState::IdenticallyZero);
    assert_eq!(
        is_zero(&p("sin(x)^3 + sin(x)*cos(x)^2 - sin(x)")),
        TriState::IdenticallyZero
    );
    assert_eq!(is_zero(&p("sin(x)^2 - cos(x)^2")), TriState::Nonzero);
    assert_eq!(is_zero(&p("sin(x)^2 + cos(y)^2 - 1")), TriState::Nonzero);
}

#[test]
fn degenerate_exponents_surface_as_conditions() {
    let e = parse_expr_with("m*(m-1)*u^(m-2)", &["m"]).unwrap();
    let TriState::UnknownUnderConditions(c) = is_zero(&e) else {
        panic!()
    };
    assert_eq!(c.len(), 1);
}

// Random expressions over a small grammar, kept shallow so that expansion
// stays cheap.
fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        Just(Expr::x()),
        Just(Expr::y()),
        Just(Expr::u()),
        (-3i64..=3).prop_map(Expr::integer),
        (1i64..=3, 2i64..=4).prop_map(|(a, b)| Expr::constant(rat(a, b))),
        Just(Expr::param("m")),
    ]
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), 0i64..=3).prop_map(|(a, n)| a.powi(n)),
            inner.clone().prop_map(|a| Expr::exp(a)),
            inner.clone().prop_map(|a| Expr::sin(a)),
            inner.prop_map(|a| Expr::x().pow(&(a * Expr::param("m")))),
        ]
    })
}

fn eval_at(e: &Expr, pt: &BTreeMap<Var, Rational>, m: &Rational) -> Option<f64> {
    let params: BTreeMap<String, Rational> = [("m".to_string(), m.clone())].into();
    eval_numeric(e, pt, &params, 128).ok().map(|f| to_f64(&f))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn differentiation_is_linear(a in arb_expr(), b in arb_expr(), c in -4i64..=4, d in 1i64..=4) {
        let q = rat(c, d);
        for v in [Var::X, Var::U] {
            let lhs = (a.scale(&q) + b.clone()).diff(v);
            let rhs = a.diff(v).scale(&q) + b.diff(v);
            prop_assert!(is_zero(&(lhs - rhs)).is_identically_zero());
        }
    }

    #[test]
    fn product_rule(a in arb_expr(), b in arb_expr()) {
        let lhs = (&a * &b).diff(Var::X);
        let rhs = &a * &b.diff(Var::X) + &b * &a.diff(Var::X);
        prop_assert!(is_zero(&(lhs - rhs)).is_identically_zero());
    }

    #[test]
    fn mixed_partials_commute(a in arb_expr()) {
        prop_assert_eq!(a.diff(Var::X).diff(Var::Y), a.diff(Var::Y).diff(Var::X));
    }

    #[test]
    fn normalize_is_idempotent(a in arb_expr()) {
        let n = normalize(&a);
        prop_assert_eq!(&n, &a);
        prop_assert_eq!(normalize(&n), n);
    }

    #[test]
    fn equal_forms_agree_numerically(a in arb_expr(), b in arb_expr(), seed in 0u64..1000) {
        use rand::{Rng, SeedableRng};
        // (a + b)^2 against its expansion built by hand.
        let lhs = (&a + &b).powi(2);
        let rhs = &a * &a + &(&a * &b).scale(&int(2)) + &b * &b;
        prop_assert_eq!(&lhs, &rhs);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let mut r = |lo: i64, hi: i64| rat(rng.gen_range(lo..=hi), 7);
            let pt: BTreeMap<Var, Rational> =
                [(Var::X, r(1, 14)), (Var::Y, r(-14, 14)), (Var::U, r(-14, 14))].into();
            let m = r(-7, 7);
            if let (Some(l), Some(rv)) = (eval_at(&lhs, &pt, &m), eval_at(&rhs, &pt, &m)) {
                prop_assert!(close(l, rv));
            }
        }
    }

    #[test]
    fn denominators_divide_inputs(ns in prop::collection::vec((-20i64..=20, 1i64..=12), 1..6)) {
        let mut s = Expr::zero();
        let mut prod = Expr::one();
        let mut den = num_bigint::BigInt::from(1);
        for (n, d) in &ns {
            let q = Expr::constant(rat(*n, *d));
            s = s + q.clone();
            prod = prod * q;
            den *= *d;
        }
        for e in [s, prod] {
            if let Some(c) = e.as_const() {
                prop_assert!((&den % c.denom()) == num_bigint::BigInt::from(0));
            }
        }
    }

    #[test]
    fn emit_parse_round_trip(a in arb_expr()) {
        let text = emit_expr(&a);
        let back = parse_expr(&text).unwrap();
        prop_assert_eq!(back, a, "{}", text);
    }

    #[test]
    fn parser_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..40)) {
        let s = String::from_utf8_lossy(&bytes);
        let _ = parse_expr(&s);
    }

    #[test]
    fn parser_never_panics_on_grammar_soup(s in "[-+*/^()xyu0-9a-z,\\[\\] .']{0,30}") {
        let _ = parse_expr(&s);
    }
}
