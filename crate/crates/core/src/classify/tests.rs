use super::*;
use crate::parser::{parse_expr, parse_expr_with, parse_spec};
use num_traits::Zero;
use rand::{Rng, SeedableRng};

fn spec(text: &str) -> PdeSpec {
    parse_spec(text).unwrap()
}

fn gen(xi: &str, eta: &str, a: &str, b: &str) -> Generator {
    gen_with(&[], xi, eta, a, b)
}

fn gen_with(params: &[&str], xi: &str, eta: &str, a: &str, b: &str) -> Generator {
    let p = |s: &str| parse_expr_with(s, params).unwrap();
    Generator::reduced(p(xi), p(eta), p(a), p(b))
}

fn report(text: &str) -> ClassificationReport {
    let s = spec(text);
    classify(&s, &AnsatzBasis::for_spec(&s)).unwrap()
}

fn all_verified(b: &ClassificationBranch) -> bool {
    !b.verified.is_empty() && b.verified.iter().all(|v| matches!(v, Some(TriState::IdenticallyZero)))
}

fn case<'a>(ks: &'a [KernelCase], constraints: &[&str]) -> &'a KernelCase {
    ks.iter()
        .find(|k| k.conditions.describe() == constraints)
        .unwrap_or_else(|| panic!("no kernel case {constraints:?}"))
}

#[test]
fn kernel_constant_alpha() {
    let r = report("a22 = 1\nalpha1 = 1\nF1 = arbitrary\n");
    assert!(same_generator_span(
        &r.kernel,
        &[
            gen("1", "0", "0", "0"),
            gen("0", "1", "0", "0"),
            gen("y", "-x", "0", "0")
        ]
    ));
}

#[test]
fn kernel_exponential_alpha() {
    let r = report("a22 = 1\nalpha1 = exp(2*x)\nF1 = arbitrary\natoms = exp(-1,1)\n");
    let expected = [
        gen("0", "1", "0", "0"),
        gen("exp(-x)*cos(y)", "-exp(-x)*sin(y)", "0", "0"),
        gen("exp(-x)*sin(y)", "exp(-x)*cos(y)", "0", "0"),
    ];
    assert!(same_generator_span(&r.kernel, &expected));
}

#[test]
fn kernel_inverse_square_alpha() {
    let r = report("a22 = 1\nalpha1 = x^(-2)\nF1 = arbitrary\n");
    let expected = [
        gen("0", "1", "0", "0"),
        gen("2*x*y", "y^2 - x^2", "0", "0"),
        gen("x", "y", "0", "0"),
    ];
    assert!(same_generator_span(&r.kernel, &expected));
}

#[test]
fn kernel_power_alpha_branches() {
    let r = report("a22 = 1\nalpha1 = x^r\nF1 = arbitrary\nparams = r\n");
    let dy = gen("0", "1", "0", "0");
    let special = case(&r.kernel_cases, &["r = -2"]);
    assert!(same_generator_span(
        &special.generators,
        &[dy.clone(), gen("2*x*y", "y^2 - x^2", "0", "0"), gen("x", "y", "0", "0")]
    ));
    let generic = case(&r.kernel_cases, &["r + 2 != 0", "r != 0"]);
    assert!(same_generator_span(&generic.generators, &[dy]));
}

fn linear_forms(cs: &[Expr], names: &[String]) -> Vec<Vec<Rational>> {
    cs.iter()
        .map(|e| {
            let p = ParamPoly::from_expr(e).unwrap();
            names
                .iter()
                .map(|n| {
                    let c = p.coeffs_in(n);
                    c.get(1).and_then(|c| c.as_constant()).unwrap_or_default()
                })
                .collect()
        })
        .collect()
}

fn symbols(d: usize) -> (Vec<String>, Vec<Expr>) {
    let names: Vec<String> = (1..=d).map(|i| format!("p{i}")).collect();
    let exprs = names.iter().map(|n| Expr::param(n)).collect();
    (names, exprs)
}

#[test]
fn orthogonality_for_quadratic_f() {
    let fam = function_family(&[FunctionSpec::Concrete(parse_expr("u^2/2 + u").unwrap())]).unwrap();
    let rels = detect_relations(&fam).unwrap();
    let (names, p) = symbols(5);
    let cs = orthogonality_constraints(&p, &rels.relations);
    assert_eq!(cs.len(), 3);
    let r = |v: &[i64]| v.iter().map(|&k| Rational::from_integer(k.into())).collect::<Vec<_>>();
    let expected = vec![r(&[1, 0, 0, 2, -2]), r(&[0, 1, 0, 0, 1]), r(&[0, 0, 1, -1, 1])];
    assert!(linalg::same_span(&linear_forms(&cs, &names), &expected));
}

#[test]
fn orthogonality_for_two_separate_relations() {
    let q = |s: &str| ParamPoly::param(s);
    let (z, one) = (ParamPoly::zero(), ParamPoly::one());
    // (F1, F2, F1', F2', uF1', uF2', u, 1)
    let rels = vec![
        vec![
            q("l1"),
            z.clone(),
            q("l3"),
            z.clone(),
            one.clone(),
            z.clone(),
            q("l7"),
            q("l8"),
        ],
        vec![z.clone(), q("l2"), z.clone(), q("l4"), z.clone(), one, q("m7"), q("m8")],
    ];
    let (_, p) = symbols(8);
    let cs = orthogonality_constraints(&p, &rels);
    let v = |s: &str| {
        parse_expr_with(
            s,
            &[
                "p1", "p2", "p3", "p4", "p5", "p6", "p7", "p8", "l1", "l2", "l3", "l4", "l7", "l8", "m7", "m8",
            ],
        )
        .unwrap()
    };
    let expected = [
        v("p1 - l1*p5"),
        v("p2 - l2*p6"),
        v("p3 - l3*p5"),
        v("p4 - l4*p6"),
        v("p7 - l7*p5 - m7*p6"),
        v("p8 - l8*p5 - m8*p6"),
    ];
    assert_eq!(cs.len(), 6);
    for e in &expected {
        assert!(
            cs.iter().any(|c| (c - e).is_zero_node() || (c + e).is_zero_node()),
            "missing {e}; got {cs:?}"
        );
    }
}

#[test]
fn single_relation_matches_pairwise_form() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let d = 5;
    let mut rnd = |lo: i64, hi: i64| Rational::from_integer(rng.gen_range(lo..=hi).into());
    for trial in 0..10 {
        let mut lam: Vec<Rational> = (0..d).map(|_| rnd(-5, 5)).collect();
        if lam[d - 1].is_zero() {
            lam[d - 1] = Rational::from_integer(3.into());
        }
        // Half the trials put p in the span of the relation.
        let p: Vec<Rational> = if trial % 2 == 0 {
            let c = rnd(-4, 4);
            lam.iter().map(|l| l * &c).collect()
        } else {
            (0..d).map(|_| rnd(-6, 6)).collect()
        };
        let pe: Vec<Expr> = p.iter().map(|v| Expr::constant(v.clone())).collect();
        let rel = vec![lam.iter().cloned().map(ParamPoly::constant).collect::<Vec<_>>()];
        let projector_ok = orthogonality_constraints(&pe, &rel).is_empty();
        let pairwise_ok = (0..d - 1).all(|i| &p[i] * &lam[d - 1] == &lam[i] * &p[d - 1]);
        assert_eq!(projector_ok, pairwise_ok, "trial {trial}");
    }
}

#[test]
fn laplace_power_alpha_power_f() {
    let r = report("a22 = 1\nalpha1 = x^r\nF1 = u^m\nparams = r, m\n");
    assert_eq!(r.branches.len(), 1);
    let b = &r.branches[0];
    assert_eq!(b.constraints, ["m - 1 != 0", "m != 0"]);
    let x = gen_with(&["r", "m"], "(m-1)*x", "(m-1)*y", "0", "-(r+2)");
    assert!(same_generator_span(&b.generators, &[x]));
    assert!(all_verified(b));
}

#[test]
fn laplace_y_power_with_liouville_nonlinearity() {
    let r = report("a22 = 1\nalpha1 = y^r\nF1 = exp(-u)\nparams = r\n");
    assert!(r
        .kernel_cases
        .iter()
        .any(|k| same_generator_span(&k.generators, &[gen("1", "0", "0", "0")])));
    let generic = r
        .branches
        .iter()
        .find(|b| b.constraints == ["r != 0"])
        .expect("generic branch");
    let expected = [
        gen_with(&["r"], "x", "y", "r + 2", "0"),
        gen_with(&["r"], "x^2 - y^2", "2*x*y", "(2*r + 4)*x", "0"),
    ];
    assert!(same_generator_span(&generic.generators, &expected));
    assert!(all_verified(generic));
}

#[test]
fn laplace_inverse_square_branches_at_two() {
    let r = report("a22 = 1\nalpha1 = k*x^(-2)\nF1 = exp(-u) + 1\nparams = k\n");
    let b = r
        .branches
        .iter()
        .find(|b| b.constraints == ["k = 2"])
        .expect("k = 2 branch");
    assert!(all_verified(b));
    for g in &b.generators {
        let phi = &g.xi.diff(Var::X) + &g.eta.diff(Var::Y) - &(&Expr::integer(2) * &g.xi) * &Expr::x().recip();
        assert!(is_zero(&(g.a() - phi)).is_identically_zero(), "{}", g.describe());
    }
    let r3 = report("a22 = 1\nalpha1 = 3*x^(-2)\nF1 = exp(-u) + 1\n");
    assert!(r3.branches.is_empty());
    assert!(!r3.kernel_only.is_empty());
}

const GSS: &str = "a22 = 1\nb1 = -1/x\nalpha1 = x^2\nalpha2 = 1\nF1 = arbitrary(F)\nF2 = arbitrary(G)\n";

#[test]
fn gss_branches() {
    let r = report(GSS);
    assert!(same_generator_span(&r.kernel, &[gen("0", "1", "0", "0")]));
    let a = r
        .branches
        .iter()
        .find(|b| b.substitutions.contains_key("lam1") && b.constraints.first().map(String::as_str) == Some("q != 0"))
        .expect("power branch");
    let fs: Vec<String> = a.solved_fs.iter().map(emit_expr).collect();
    assert_eq!(fs, ["u^(4/q + 1)", "u^(2/q + 1)"]);
    assert!(same_generator_span(
        &a.generators,
        &[gen_with(&["q"], "x", "y", "0", "-q")]
    ));
    let b = r
        .branches
        .iter()
        .find(|b| b.pattern.as_deref() == Some("E,E"))
        .expect("exponential branch");
    let fs: Vec<String> = b.solved_fs.iter().map(emit_expr).collect();
    assert_eq!(fs, ["exp(-2*u)", "exp(-u)"]);
    assert!(same_generator_span(&b.generators, &[gen("x", "y", "2", "0")]));
    for br in &r.branches {
        assert!(all_verified(br), "{:?}", br.constraints);
    }
}

#[test]
fn gss_special_power_has_an_extra_generator() {
    let r = report(GSS);
    let s = r
        .branches
        .iter()
        .find(|b| b.notes.iter().any(|n| n.starts_with("q = -1/2")))
        .expect("special value");
    let fs: Vec<String> = s.solved_fs.iter().map(emit_expr).collect();
    assert_eq!(fs, ["1/u^7", "1/u^3"]);
    let expected = [gen("x", "y", "0", "1/2"), gen("x*y", "y^2/2 - x^2/2", "0", "y/2")];
    assert!(same_generator_span(&s.generators, &expected));
}

#[test]
fn gss_alpha_gate() {
    let r = report("a22 = 1\nb1 = -1/x\nalpha1 = x + 1\nalpha2 = 1\nF1 = arbitrary(F)\nF2 = arbitrary(G)\n");
    assert!(r.branches.is_empty());
    assert_eq!(r.alpha_form, Some(None));
}

#[test]
fn linear_f_routes_to_linear_case() {
    let r = report("a22 = 1\nalpha1 = x\nF1 = 2*u + 1\n");
    let lc = r.linear_case.expect("linear case");
    assert_eq!(emit_expr(&lc.alpha_tilde), "2*x");
    assert!(r.branches.is_empty());
}
