//! The two-function plasma equation u_xx + u_yy - u_x/x = x^2 F(u) + G(u).

use liesym::classify::{classify, AnsatzBasis};
use liesym::parser::parse_spec;

fn main() {
    let spec = parse_spec(include_str!("../specs/gss.spec")).unwrap();
    let report = classify(&spec, &AnsatzBasis::for_spec(&spec)).unwrap();
    for b in &report.branches {
        let fs: Vec<String> = b.solved_fs.iter().map(|f| f.to_string()).collect();
        println!("F = {}, G = {}  {:?}", fs[0], fs[1], b.constraints);
        for g in &b.generators {
            println!("  {}", g.describe());
        }
        for n in &b.notes {
            println!("  note: {n}");
        }
    }
    println!("{} relation patterns admit only the kernel", report.kernel_only.len());
}
