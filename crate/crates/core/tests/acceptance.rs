//! Acceptance criteria 1-9. Each test prints one PASS/FAIL line.

use std::time::Instant;

use liesym::classify::{
    classify, detect_relations, function_family, same_generator_span, AnsatzBasis, ClassificationBranch,
    ClassificationReport,
};
use liesym::expr::{is_zero, rat, Expr, Rational, TriState, Var};
use liesym::linalg::{same_span, Conditions};
use liesym::parser::{parse_expr, parse_expr_with, parse_spec, FunctionSpec, PdeSpec};
use liesym::prolong::{cross_check, determining_structure, Generator};
use liesym::verify::{bracket, numeric_check, symbolic_residual, NumericOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report_line(n: usize, name: &str, ok: bool, detail: &str, t: Instant) {
    let detail = detail.trim().trim_end_matches(';').trim_end_matches("; ()").trim();
    println!(
        "criterion {n} ({name}): {} [{:.2}s] {detail}",
        if ok { "PASS" } else { "FAIL" },
        t.elapsed().as_secs_f64()
    );
    assert!(ok, "criterion {n} failed: {detail}");
}

fn spec(text: &str) -> PdeSpec {
    parse_spec(text).unwrap()
}

fn gen(params: &[&str], xi: &str, eta: &str, a: &str, b: &str) -> Generator {
    let p = |s: &str| parse_expr_with(s, params).unwrap();
    Generator::reduced(p(xi), p(eta), p(a), p(b))
}

fn run(s: &PdeSpec) -> ClassificationReport {
    classify(s, &AnsatzBasis::for_spec(s)).unwrap()
}

fn opts() -> NumericOptions {
    NumericOptions::default()
}

/// Symbolic and numeric verification; returns a failure description.
fn verified(s: &PdeSpec, g: &Generator, cond: &Conditions) -> Result<(), String> {
    match symbolic_residual(s, g, cond) {
        Ok(TriState::IdenticallyZero) => {}
        other => return Err(format!("symbolic {other:?} for {}", g.describe())),
    }
    let r = numeric_check(s, g, cond, &opts()).map_err(|e| e.to_string())?;
    if !r.passed {
        return Err(format!("numeric max {:e} for {}", r.numeric_max_f64(), g.describe()));
    }
    Ok(())
}

fn branch_spec(s: &PdeSpec, b: &ClassificationBranch) -> (PdeSpec, Conditions) {
    let cond = if b.substitutions.is_empty() {
        b.conditions.clone()
    } else {
        Conditions::default()
    };
    (b.specialised_spec(s), cond)
}

fn verify_branch(s: &PdeSpec, b: &ClassificationBranch) -> Result<usize, String> {
    let (bs, cond) = branch_spec(s, b);
    for g in &b.generators {
        verified(&bs, g, &cond)?;
    }
    Ok(b.generators.len())
}

// ---------------------------------------------------------------------------
// Random quasi-linear specs with polynomial coefficients

fn random_poly(rng: &mut ChaCha8Rng, nonzero: bool) -> String {
    let monos = ["1", "x", "y", "x*y", "x^2", "y^2"];
    loop {
        let terms: Vec<String> = monos
            .iter()
            .filter_map(|m| {
                let c: i64 = if rng.gen_bool(0.5) { rng.gen_range(-3..=3) } else { 0 };
                (c != 0).then(|| format!("({c})*{m}"))
            })
            .collect();
        if !terms.is_empty() {
            return terms.join(" + ");
        }
        if !nonzero {
            return "0".into();
        }
    }
}

fn random_specs() -> Vec<PdeSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut out = Vec::new();
    while out.len() < 5 {
        let l = 1 + out.len() % 2;
        let mut text = format!(
            "a12 = {}\na22 = {}\nb1 = {}\nb2 = {}\n",
            random_poly(&mut rng, false),
            random_poly(&mut rng, true),
            random_poly(&mut rng, false),
            random_poly(&mut rng, false)
        );
        for i in 1..=l {
            text.push_str(&format!(
                "alpha{i} = {}\nF{i} = arbitrary\n",
                random_poly(&mut rng, true)
            ));
        }
        if let Ok(s) = parse_spec(&text) {
            out.push(s);
        }
    }
    out
}

#[test]
fn criterion_1_determining_structure() {
    let t = Instant::now();
    let bad: Vec<String> = random_specs()
        .iter()
        .enumerate()
        .filter(|(_, s)| !determining_structure(s).holds())
        .map(|(i, s)| format!("spec {i}: {:?}", determining_structure(s)))
        .collect();
    report_line(
        1,
        "determining-system structure on 5 random specs",
        bad.is_empty(),
        &bad.join("; "),
        t,
    );
}

#[test]
fn criterion_2_cross_check() {
    let t = Instant::now();
    let mut specs = vec![
        spec("a22 = 1\nalpha1 = 1\nF1 = arbitrary\n"),
        spec("a22 = 1\nb1 = -1/x\nalpha1 = x^2\nalpha2 = 1\nF1 = arbitrary(F)\nF2 = arbitrary(G)\n"),
    ];
    specs.extend(random_specs());
    let g = Generator::symbolic_reduced();
    let bad: Vec<usize> = (0..specs.len()).filter(|&i| !cross_check(&specs[i], &g)).collect();
    report_line(
        2,
        "fast p-vector equals first-principles extraction",
        bad.is_empty(),
        &bad.iter().map(|b| format!("spec {b:?}")).collect::<Vec<_>>().join("; "),
        t,
    );
}

// ---------------------------------------------------------------------------

fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&k| rat(k, 1)).collect()
}

fn relation_basis(f: &str, params: &[&str]) -> Vec<Vec<Rational>> {
    let e = parse_expr_with(f, params).unwrap();
    let fam = function_family(&[FunctionSpec::Concrete(e)]).unwrap();
    detect_relations(&fam).unwrap().rational().unwrap_or_default()
}

#[test]
fn criterion_3_relation_detection() {
    let t = Instant::now();
    let mut fails = Vec::new();
    // F' - u - 1 = 0 and 2F - uF' - u = 0 over (F, F', uF', u, 1).
    let quad = relation_basis("u^2/2 + u", &[]);
    if !(quad.len() == 2 && same_span(&quad, &[ints(&[0, 1, 0, -1, -1]), ints(&[2, 0, -1, -1, 0])])) {
        fails.push(format!("quadratic {quad:?}"));
    }
    let fam = function_family(&[FunctionSpec::Concrete(parse_expr_with("u^m", &["m"]).unwrap())]).unwrap();
    let pw = detect_relations(&fam).unwrap();
    let expected = ["-m", "0", "1", "0", "0"];
    let got: Vec<String> = pw.relations.iter().flatten().map(|c| c.to_string()).collect();
    if pw.relations.len() != 1 || got != expected {
        fails.push(format!("power {got:?}"));
    }
    let ex = relation_basis("exp(-u)", &[]);
    if !(ex.len() == 1 && same_span(&ex, &[ints(&[1, 1, 0, 0, 0])])) {
        fails.push(format!("exp {ex:?}"));
    }
    let sn = relation_basis("sin(u)", &[]);
    if !sn.is_empty() {
        fails.push(format!("sin {sn:?}"));
    }
    report_line(3, "relation detection", fails.is_empty(), &fails.join("; "), t);
}

// ---------------------------------------------------------------------------

fn kernel_examples() -> Vec<(PdeSpec, Vec<Generator>)> {
    let r = |alpha: &str, extra: &str| {
        spec(&format!(
            "a22 = 1\nalpha1 = {alpha}\nF1 = arbitrary\natoms = exp(-1,1)\ndegree = 4\n{extra}"
        ))
    };
    let p = &[] as &[&str];
    vec![
        (
            r("exp(2*x)", ""),
            vec![
                gen(p, "0", "1", "0", "0"),
                gen(p, "exp(-x)*cos(y)", "-exp(-x)*sin(y)", "0", "0"),
                gen(p, "exp(-x)*sin(y)", "exp(-x)*cos(y)", "0", "0"),
            ],
        ),
        (
            r("x^(-2)", ""),
            vec![
                gen(p, "0", "1", "0", "0"),
                gen(p, "2*x*y", "y^2 - x^2", "0", "0"),
                gen(p, "x", "y", "0", "0"),
            ],
        ),
        (
            r("1", ""),
            vec![
                gen(p, "1", "0", "0", "0"),
                gen(p, "0", "1", "0", "0"),
                gen(p, "y", "-x", "0", "0"),
            ],
        ),
    ]
}

fn power_alpha() -> PdeSpec {
    spec("a22 = 1\nalpha1 = x^r\nF1 = arbitrary\nparams = r\natoms = exp(-1,1)\ndegree = 4\n")
}

#[test]
fn criterion_4_kernel_reproduction() {
    let t = Instant::now();
    let mut fails = Vec::new();
    for (s, expected) in kernel_examples() {
        let r = run(&s);
        if !same_generator_span(&r.kernel, &expected) {
            fails.push(format!(
                "alpha = {}: got {:?}",
                s.alphas[0],
                r.kernel.iter().map(|g| g.describe()).collect::<Vec<_>>()
            ));
        }
    }
    let r = run(&power_alpha());
    let find = |c: &[&str]| r.kernel_cases.iter().find(|k| k.conditions.describe() == c);
    let p = &[] as &[&str];
    match find(&["r = -2"]) {
        Some(k)
            if same_generator_span(
                &k.generators,
                &[
                    gen(p, "0", "1", "0", "0"),
                    gen(p, "2*x*y", "y^2 - x^2", "0", "0"),
                    gen(p, "x", "y", "0", "0"),
                ],
            ) => {}
        _ => fails.push("r = -2 case".into()),
    }
    match find(&["r + 2 != 0", "r != 0"]) {
        Some(k) if same_generator_span(&k.generators, &[gen(p, "0", "1", "0", "0")]) => {}
        _ => fails.push("generic r case".into()),
    }
    // r = 0 is alpha = 1: translations and rotation.
    match find(&["r = 0"]) {
        Some(k) if same_generator_span(&k.generators, &kernel_examples()[2].1) => {}
        _ => fails.push("r = 0 case".into()),
    }
    report_line(4, "kernel reproduction", fails.is_empty(), &fails.join("; "), t);
}

// ---------------------------------------------------------------------------

fn laplace_cases() -> Vec<(PdeSpec, ClassificationReport)> {
    [
        "a22 = 1\nalpha1 = x^r\nF1 = u^m\nparams = r, m\n",
        "a22 = 1\nalpha1 = y^r\nF1 = exp(-u)\nparams = r\n",
        "a22 = 1\nalpha1 = k*x^(-2)\nF1 = exp(-u) + 1\nparams = k\n",
    ]
    .iter()
    .map(|t| {
        let s = spec(t);
        let r = run(&s);
        (s, r)
    })
    .collect()
}

#[test]
fn criterion_5_laplace_classification() {
    let t = Instant::now();
    let mut fails = Vec::new();
    let mut count = 0;
    let cases = laplace_cases();

    let (_, r) = &cases[0];
    let x = gen(&["r", "m"], "(m - 1)*x", "(m - 1)*y", "0", "-(r + 2)");
    match r.branches.as_slice() {
        [b] if b.constraints == ["m - 1 != 0", "m != 0"] && same_generator_span(&b.generators, &[x]) => {}
        bs => fails.push(format!("x^r u^m: {} branches", bs.len())),
    }

    let (_, r) = &cases[1];
    let x1 = gen(&["r"], "x", "y", "r + 2", "0");
    let x2 = gen(&["r"], "x^2 - y^2", "2*x*y", "(2*r + 4)*x", "0");
    if !r
        .branches
        .iter()
        .any(|b| same_generator_span(&b.generators, &[x1.clone(), x2.clone()]))
    {
        fails.push("y^r exp(-u): X1, X2 missing".into());
    }
    if !r.kernel.contains(&gen(&[], "1", "0", "0", "0")) {
        fails.push("y^r exp(-u): d/dx missing from kernel".into());
    }

    let (_, r) = &cases[2];
    match r.branches.iter().find(|b| b.constraints == ["k = 2"]) {
        Some(b) => {
            for g in &b.generators {
                let phi = &g.xi.diff(Var::X) + &g.eta.diff(Var::Y) - &(&Expr::integer(2) * &g.xi) * &Expr::x().recip();
                if !is_zero(&(g.a() - phi)).is_identically_zero() {
                    fails.push(format!("k = 2 generator off the family: {}", g.describe()));
                }
            }
        }
        None => fails.push("k = 2 branch missing".into()),
    }
    let r3 = run(&spec("a22 = 1\nalpha1 = 3*x^(-2)\nF1 = exp(-u) + 1\n"));
    if !r3.branches.is_empty() {
        fails.push("k = 3 is not kernel-only".into());
    }

    for (s, r) in &cases {
        for b in &r.branches {
            match verify_branch(s, b) {
                Ok(n) => count += n,
                Err(e) => fails.push(e),
            }
        }
    }
    report_line(
        5,
        "Laplace classification",
        fails.is_empty(),
        &format!("{count} generators verified; {}", fails.join("; ")),
        t,
    );
}

// ---------------------------------------------------------------------------

const GSS: &str = "a22 = 1\nb1 = -1/x\nalpha1 = x^2\nalpha2 = 1\nF1 = arbitrary(F)\nF2 = arbitrary(G)\n";

#[test]
fn criterion_6_gss_classification() {
    let t = Instant::now();
    let mut fails = Vec::new();
    let s = spec(GSS);
    let r = run(&s);
    let q_branch = r.branches.iter().find(|b| b.substitutions.contains_key("lam1"));
    match q_branch {
        Some(b) => {
            let fs: Vec<String> = b.solved_fs.iter().map(|f| f.to_string()).collect();
            if fs != ["u^(4/q + 1)", "u^(2/q + 1)"] {
                fails.push(format!("branch (a) forms {fs:?}"));
            }
            let x = gen(&["q"], "x", "y", "0", "-q");
            if !same_generator_span(&b.generators, &[x.clone()]) {
                fails.push("branch (a) generator".into());
            }
            for q in [1, 2, -3] {
                let qv = Expr::integer(q);
                let fq: Vec<FunctionSpec> = b
                    .solved_fs
                    .iter()
                    .map(|f| FunctionSpec::Concrete(f.subst_param("q", &qv)))
                    .collect();
                let sq = s.with_functions(fq);
                if let Err(e) = verified(&sq, &x.map(|e| e.subst_param("q", &qv)), &Conditions::default()) {
                    fails.push(format!("q = {q}: {e}"));
                }
            }
        }
        None => fails.push("branch (a) missing".into()),
    }
    match r.branches.iter().find(|b| b.pattern.as_deref() == Some("E,E")) {
        Some(b) => {
            let fs: Vec<String> = b.solved_fs.iter().map(|f| f.to_string()).collect();
            if fs != ["exp(-2*u)", "exp(-u)"] || !same_generator_span(&b.generators, &[gen(&[], "x", "y", "2", "0")]) {
                fails.push(format!("branch (b) {fs:?}"));
            }
            if let Err(e) = verify_branch(&s, b) {
                fails.push(e);
            }
        }
        None => fails.push("branch (b) missing".into()),
    }
    let extra: Vec<String> = r
        .branches
        .iter()
        .filter(|b| b.notes.iter().any(|n| n.starts_with("q = ")))
        .map(|b| {
            if let Err(e) = verify_branch(&s, b) {
                fails.push(e);
            }
            format!(
                "special case F = {}: {} generators",
                b.solved_fs.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(", "),
                b.generators.len()
            )
        })
        .collect();
    if !same_generator_span(&r.kernel, &[gen(&[], "0", "1", "0", "0")]) {
        fails.push("kernel is not d/dy alone".into());
    }
    let gate = run(&spec(&GSS.replace("alpha1 = x^2", "alpha1 = x + 1")));
    if !gate.branches.is_empty() {
        fails.push("alpha = x + 1 has branches".into());
    }
    report_line(
        6,
        "GSS classification",
        fails.is_empty(),
        &format!(
            "{} branches ({}); {}",
            r.branches.len(),
            extra.join("; "),
            fails.join("; ")
        ),
        t,
    );
}

// ---------------------------------------------------------------------------

fn total_degree(e: &Expr) -> Option<usize> {
    let cs = e.poly_coeffs(Var::X)?;
    let mut d = 0;
    for (i, c) in cs.iter().enumerate() {
        if c.is_zero_node() {
            continue;
        }
        d = d.max(i + c.poly_coeffs(Var::Y)?.len() - 1);
    }
    Some(d)
}

/// Real and imaginary parts of `c (x + i y)^k` for `c` in {1, i}.
fn holomorphic_pairs(max: usize) -> Vec<(Expr, Expr)> {
    let mut out = Vec::new();
    for k in 0..=max {
        let (mut re, mut im) = (Vec::new(), Vec::new());
        let mut binom: i64 = 1;
        for j in 0..=k {
            // C(k, j) x^(k-j) (i y)^j
            let term = Expr::integer(binom) * Expr::x().powi((k - j) as i64) * Expr::y().powi(j as i64);
            match j % 4 {
                0 => re.push(term),
                1 => im.push(term),
                2 => re.push(term.neg()),
                _ => im.push(term.neg()),
            }
            binom = binom * (k - j) as i64 / (j + 1) as i64;
        }
        let (re, im) = (Expr::add_all(re), Expr::add_all(im));
        out.push((re.clone(), im.clone()));
        out.push((im.neg(), re));
    }
    out
}

#[test]
fn criterion_7_liouville_family() {
    let t = Instant::now();
    let mut fails = Vec::new();
    let s = spec("a22 = 1\nalpha1 = 1\nF1 = exp(-u)\ndegree = 4\n");
    let oracle: Vec<Generator> = holomorphic_pairs(4)
        .into_iter()
        .map(|(xi, eta)| {
            let a = &xi.diff(Var::X) + &eta.diff(Var::Y);
            Generator::reduced(xi, eta, a, Expr::zero())
        })
        .collect();
    for g in &oracle {
        if let Err(e) = verified(&s, g, &Conditions::default()) {
            fails.push(e);
        }
    }
    let r = run(&s);
    let mut family: Vec<Generator> = r.kernel.clone();
    family.extend(r.branches.iter().flat_map(|b| b.generators.clone()));
    if !same_generator_span(&family, &oracle) {
        fails.push(format!(
            "classified family has {} generators, not the oracle span",
            family.len()
        ));
    }
    let (mut inside, mut outside) = (0, 0);
    for a in &family {
        for b in &family {
            let c = bracket(a, b);
            let deg = [&c.xi, &c.eta]
                .iter()
                .filter_map(|e| total_degree(e))
                .max()
                .unwrap_or(0);
            if deg > 4 {
                outside += 1;
                continue;
            }
            inside += 1;
            let mut with = family.clone();
            with.push(c.clone());
            if !same_generator_span(&family, &with) {
                fails.push(format!("bracket leaves the span: {}", c.describe()));
            }
        }
    }
    report_line(
        7,
        "Liouville family",
        fails.is_empty(),
        &format!(
            "{} oracle generators; {inside} brackets in span, {outside} beyond degree 4; {}",
            oracle.len(),
            fails.join("; ")
        ),
        t,
    );
}

// ---------------------------------------------------------------------------

fn perturbed(g: &Generator) -> Generator {
    Generator::new(g.xi.clone(), g.eta.clone(), &g.phi + &Expr::one())
}

fn cube(s: &PdeSpec) -> PdeSpec {
    s.with_functions(vec![FunctionSpec::Concrete(parse_expr("u^3").unwrap()); s.num_terms()])
}

#[test]
fn criterion_8_negative_controls() {
    let t = Instant::now();
    let mut fails = Vec::new();
    let mut n = 0;
    let mut check = |s: &PdeSpec, g: &Generator, cond: &Conditions| {
        n += 1;
        match numeric_check(s, &perturbed(g), cond, &opts()) {
            Ok(r) if r.numeric_max_f64() > 1e-5 => {}
            Ok(r) => fails.push(format!("perturbed {} passes ({:e})", g.describe(), r.numeric_max_f64())),
            Err(e) => fails.push(e.to_string()),
        }
    };
    for (s, expected) in kernel_examples() {
        for g in &expected {
            check(&cube(&s), g, &Conditions::default());
        }
    }
    for (s, r) in laplace_cases() {
        for b in &r.branches {
            let (bs, cond) = branch_spec(&s, b);
            for g in &b.generators {
                check(&bs, g, &cond);
            }
        }
    }
    let s = spec(GSS);
    for b in &run(&s).branches {
        let (bs, cond) = if b.substitutions.is_empty() {
            branch_spec(&s, b)
        } else {
            let q = Expr::integer(2);
            let fs = b
                .solved_fs
                .iter()
                .map(|f| FunctionSpec::Concrete(f.subst_param("q", &q)))
                .collect();
            (s.with_functions(fs), Conditions::default())
        };
        for g in &b.generators {
            check(&bs, &g.map(|e| e.subst_param("q", &Expr::integer(2))), &cond);
        }
    }
    let liouville = spec("a22 = 1\nalpha1 = 1\nF1 = exp(-u)\n");
    for b in &run(&liouville).branches {
        for g in &b.generators {
            check(&liouville, g, &Conditions::default());
        }
    }
    report_line(
        8,
        "negative controls",
        fails.is_empty(),
        &format!("{n} perturbed generators; {}", fails.join("; ")),
        t,
    );
}

#[test]
fn criterion_9_kernel_f_independence() {
    let t = Instant::now();
    let mut fails = Vec::new();
    let mut n = 0;
    let mut kernels: Vec<(PdeSpec, Vec<Generator>, Conditions)> = kernel_examples()
        .into_iter()
        .map(|(s, _)| {
            let k = run(&s).kernel;
            (s, k, Conditions::default())
        })
        .collect();
    let pa = power_alpha();
    for k in run(&pa).kernel_cases {
        kernels.push((pa.clone(), k.generators, k.conditions));
    }
    for (s, gens, cond) in &kernels {
        for f in ["u^3", "exp(u)", "u^(-1)"] {
            let sf = s.with_functions(vec![FunctionSpec::Concrete(parse_expr(f).unwrap())]);
            for g in gens {
                n += 1;
                match symbolic_residual(&sf, g, cond) {
                    Ok(TriState::IdenticallyZero) => {}
                    other => fails.push(format!("F = {f}, {}: {other:?}", g.describe())),
                }
            }
        }
    }
    report_line(
        9,
        "kernel independent of F",
        fails.is_empty(),
        &format!("{n} checks; {}", fails.join("; ")),
        t,
    );
}
