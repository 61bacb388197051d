use liesym::cli::{run, EXIT_BRANCH_CAP, EXIT_INPUT, EXIT_OK, EXIT_UNSUPPORTED_F, EXIT_VERIFY_FAILED};
use liesym::parser::{parse_expr_ctx, ParseContext};
use serde_json::Value;

fn path(name: &str) -> String {
    format!("{}/specs/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn liesym(args: &[&str]) -> (i32, String) {
    let mut v = vec!["liesym".to_string()];
    v.extend(args.iter().map(|a| a.to_string()));
    run(v)
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut a = vec!["--format", "json"];
    a.extend_from_slice(args);
    let (code, out) = liesym(&a);
    (code, serde_json::from_str(&out).expect("valid json"))
}

const EXPR_KEYS: &[&str] = &[
    "xi",
    "eta",
    "phi",
    "A",
    "B",
    "expr",
    "solved_fs",
    "alpha_tilde",
    "beta_tilde",
    "side_condition",
    "family",
];

// Every expression-valued string must parse back.
fn check_round_trip(v: &Value, key: Option<&str>, count: &mut usize) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                if k == "family" && x.as_array().is_some_and(|a| a.iter().all(Value::is_object)) {
                    check_round_trip(x, None, count);
                } else {
                    check_round_trip(x, Some(k), count);
                }
            }
        }
        Value::Array(a) => a.iter().for_each(|x| check_round_trip(x, key, count)),
        Value::String(s) => {
            let Some(k) = key else { return };
            let pieces: Vec<&str> = match k {
                k if EXPR_KEYS.contains(&k) => vec![s],
                "constraints" => s.split(" != ").flat_map(|p| p.split(" = ")).collect(),
                "relations" if !s.contains('\'') => vec![s],
                _ => return,
            };
            for p in pieces {
                parse_expr_ctx(p, &ParseContext::permissive())
                    .unwrap_or_else(|e| panic!("`{p}` (key {k}) does not parse: {e}"));
                *count += 1;
            }
        }
        _ => {}
    }
}

#[test]
fn relations_quadratic_has_rank_three() {
    let (code, v) = json(&["relations", &path("laplace_quadratic.spec")]);
    assert_eq!(code, EXIT_OK);
    let case = &v["payload"]["cases"][0];
    assert_eq!(case["k"], 3);
    assert_eq!(case["relations"].as_array().unwrap().len(), 2);
}

#[test]
fn relations_arbitrary_and_linear() {
    let (_, v) = json(&["relations", &path("laplace_arbitrary.spec")]);
    assert!(v["payload"]["cases"][0]["relations"].as_array().unwrap().is_empty());
    let notes = v["payload"]["notes"].to_string();
    assert!(notes.contains("kernel-only analysis applies"));
    let (code, v) = json(&["relations", &path("laplace_linear.spec")]);
    assert_eq!(code, EXIT_OK);
    assert!(v["payload"]["linear_case"].is_object());
}

#[test]
fn prolong_stamps_cross_check() {
    for spec in ["gss.spec", "laplace_arbitrary.spec", "laplace_power.spec"] {
        let (code, v) = json(&["prolong", &path(spec)]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(v["payload"]["cross_check"], true, "{spec}");
        assert_eq!(v["payload"]["f_dependent_count"], 1, "{spec}");
    }
}

#[test]
fn verify_exit_codes() {
    let spec = path("liouville.spec");
    let (code, _) = liesym(&["verify", &spec, "--generator", &path("liouville_conformal.gen")]);
    assert_eq!(code, EXIT_OK);
    let (code, v) = json(&["verify", &spec, "--generator", &path("translate_shift.gen")]);
    assert_eq!(code, EXIT_VERIFY_FAILED);
    assert_eq!(v["payload"]["passed"], false);
    let (code, v) = json(&["verify", &spec, "--generator", &path("shift.gen")]);
    assert_eq!(code, EXIT_VERIFY_FAILED);
    assert_eq!(v["payload"]["symbolic"], "Nonzero");
    let (code, _) = liesym(&[
        "verify",
        &path("gss_power_q2.spec"),
        "--generator",
        &path("gss_scaling_q2.gen"),
    ]);
    assert_eq!(code, EXIT_OK);
}

#[test]
fn input_errors_exit_two() {
    let (code, _) = liesym(&["classify", "/nonexistent.spec"]);
    assert_eq!(code, EXIT_INPUT);
    let dir = std::env::temp_dir().join("liesym-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.spec");
    std::fs::write(&bad, "a22 = 1\nalpha1 = x +\nF1 = u^2\n").unwrap();
    let (code, v) = json(&["relations", bad.to_str().unwrap()]);
    assert_eq!(code, EXIT_INPUT);
    assert_eq!(v["payload"]["kind"], "error");
    let (code, _) = liesym(&["frobnicate"]);
    assert_eq!(code, EXIT_INPUT);
}

#[test]
fn unsupported_f_exits_three() {
    let dir = std::env::temp_dir().join("liesym-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("unexpandable.spec");
    std::fs::write(&f, "a22 = 1\nalpha1 = 1\nF1 = exp(m*u^2)\nparams = m\n").unwrap();
    let (code, _) = liesym(&["relations", f.to_str().unwrap()]);
    assert_eq!(code, EXIT_UNSUPPORTED_F);
}

#[test]
fn branch_cap_exits_four() {
    let (code, _) = liesym(&["classify", &path("laplace_power_alpha.spec"), "--branch-cap", "1"]);
    assert_eq!(code, EXIT_BRANCH_CAP);
}

#[test]
fn classify_gss_reports_and_gate() {
    let (code, v) = json(&["classify", &path("gss.spec")]);
    assert_eq!(code, EXIT_OK);
    let branches = v["payload"]["branches"].as_array().unwrap();
    assert!(branches.iter().any(|b| b["pattern"] == "E,E"));
    for b in branches {
        for g in b["generators"].as_array().unwrap() {
            assert_eq!(g["verified"], "IdenticallyZero");
        }
    }
    let (_, v) = json(&["classify", &path("gss_shifted_alpha.spec")]);
    assert!(v["payload"]["branches"].as_array().unwrap().is_empty());
    assert!(v["payload"]["notes"].to_string().contains("alpha form condition fails"));
}

#[test]
fn reports_round_trip_and_are_deterministic() {
    let runs: Vec<Vec<String>> = vec![
        vec!["relations".into(), path("laplace_quadratic.spec")],
        vec!["prolong".into(), path("gss.spec")],
        vec!["kernel".into(), path("laplace_exp_alpha.spec")],
        vec!["classify".into(), path("laplace_y_power_exp.spec")],
        vec!["classify".into(), path("gss.spec")],
        vec!["classify".into(), path("laplace_linear.spec")],
        vec![
            "verify".into(),
            path("liouville.spec"),
            "--generator".into(),
            path("liouville_conformal.gen"),
            "--seed".into(),
            "9".into(),
        ],
    ];
    for r in &runs {
        let args: Vec<&str> = r.iter().map(String::as_str).collect();
        let mut a = vec!["--format", "json"];
        a.extend_from_slice(&args);
        let (_, first) = liesym(&a);
        let (_, second) = liesym(&a);
        assert_eq!(first, second, "{args:?}");
        let v: Value = serde_json::from_str(&first).unwrap();
        let mut n = 0;
        check_round_trip(&v["payload"], None, &mut n);
        assert!(n > 0, "{args:?}");
        let (h1, h2) = (liesym(&args).1, liesym(&args).1);
        assert_eq!(h1, h2);
    }
}
