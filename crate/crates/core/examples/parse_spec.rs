//! Reading an equation spec and a generator file.

use liesym::parser::{emit_generator_file, parse_generator_file, parse_spec, ParseContext};

fn main() {
    let spec = parse_spec(include_str!("../specs/gss.spec")).unwrap();
    println!("a22 = {}, b1 = {}", spec.a22, spec.b1);
    for (i, a) in spec.alphas.iter().enumerate() {
        println!(
            "alpha{} = {a}, F{} arbitrary: {}",
            i + 1,
            i + 1,
            spec.fs[i].is_arbitrary()
        );
    }
    let g = parse_generator_file(
        include_str!("../specs/liouville_conformal.gen"),
        &ParseContext::default(),
    )
    .unwrap();
    println!("generator: {}", g.describe());
    print!("re-emitted:\n{}", emit_generator_file(&g));
}
