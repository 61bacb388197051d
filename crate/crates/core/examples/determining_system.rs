//! Determining system of a reduced generator, the p-vector and the
//! structural checks.

use liesym::parser::parse_spec;
use liesym::prolong::{cross_check, determining_structure, p_coefficients, reduced_system, Generator};

fn main() {
    let spec = parse_spec(include_str!("../specs/laplace_arbitrary.spec")).unwrap();
    let g = Generator::symbolic_reduced();
    let sys = reduced_system(&spec, &g);
    for (i, e) in sys.equations.iter().enumerate() {
        let mark = if Some(i) == sys.f_dependent {
            " (F-dependent)"
        } else {
            ""
        };
        println!("[{}]{mark}  {} = 0", e.label, e.expr);
    }
    for (i, p) in p_coefficients(&spec, &g).iter().enumerate() {
        println!("p{} = {p}", i + 1);
    }
    println!("cross check: {}", cross_check(&spec, &g));
    println!("{:?}", determining_structure(&spec));
}
