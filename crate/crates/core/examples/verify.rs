//! Symbolic and sampled checks of candidate generators, and brackets.

use liesym::linalg::Conditions;
use liesym::parser::{parse_expr, parse_spec};
use liesym::prolong::Generator;
use liesym::verify::{bracket, check, NumericOptions};

fn main() {
    let spec = parse_spec(include_str!("../specs/liouville.spec")).unwrap();
    let p = |s: &str| parse_expr(s).unwrap();
    let candidates = [
        (
            "conformal",
            Generator::reduced(p("x^2 - y^2"), p("2*x*y"), p("4*x"), p("0")),
        ),
        ("shift", Generator::reduced(p("1"), p("0"), p("1"), p("0"))),
    ];
    for (name, g) in &candidates {
        let r = check(&spec, g, &Conditions::default(), &NumericOptions::default()).unwrap();
        println!(
            "{name}: symbolic {:?}, max residual {:e}, passed {}",
            r.symbolic,
            r.numeric_max_f64(),
            r.passed
        );
    }
    let d = Generator::reduced(p("x"), p("y"), p("2"), p("0"));
    println!("[conformal, scaling] = {}", bracket(&candidates[0].1, &d).describe());
}
