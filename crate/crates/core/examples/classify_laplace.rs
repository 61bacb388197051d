//! Classification of u_xx + u_yy = x^r u^m and u_xx + u_yy = y^r exp(-u).

use liesym::classify::{classify, AnsatzBasis};
use liesym::parser::parse_spec;

fn main() {
    for text in [
        include_str!("../specs/laplace_power.spec"),
        include_str!("../specs/laplace_y_power_exp.spec"),
    ] {
        let spec = parse_spec(text).unwrap();
        let report = classify(&spec, &AnsatzBasis::for_spec(&spec)).unwrap();
        println!("{}", text.lines().next().unwrap_or(""));
        for g in &report.kernel {
            println!("  kernel: {}", g.describe());
        }
        for b in &report.branches {
            println!(
                "  branch {:?}, F = {:?}",
                b.constraints,
                b.solved_fs.iter().map(|f| f.to_string()).collect::<Vec<_>>()
            );
            for g in &b.generators {
                println!("    {}", g.describe());
            }
        }
    }
}
