//! Linear relations among F, F', uF', u, 1.

use liesym::classify::{detect_relations, function_family};
use liesym::parser::{parse_expr, FunctionSpec};

fn main() {
    for f in ["u^2/2 + u", "exp(-u)", "u^3 + u^2", "sin(u)"] {
        let fam = function_family(&[FunctionSpec::Concrete(parse_expr(f).unwrap())]).unwrap();
        let rels = detect_relations(&fam).unwrap();
        println!("F = {f}: k = {}", rels.rank());
        for r in rels.describe(&fam) {
            println!("  {r}");
        }
    }
}
