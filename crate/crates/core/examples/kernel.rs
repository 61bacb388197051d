//! Kernel of the symmetry groups for u_xx + u_yy = x^r F(u).

use liesym::classify::{kernel_cases, AnsatzBasis};
use liesym::linalg::DEFAULT_BRANCH_CAP;
use liesym::parser::parse_spec;

fn main() {
    let spec = parse_spec(include_str!("../specs/laplace_power_alpha.spec")).unwrap();
    let basis = AnsatzBasis::for_spec(&spec);
    for case in kernel_cases(&spec, &basis, DEFAULT_BRANCH_CAP).unwrap() {
        println!("{:?}", case.conditions.describe());
        for g in &case.generators {
            println!("  {}", g.describe());
        }
    }
}
