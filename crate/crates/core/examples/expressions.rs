//! Canonical forms, differentiation and the zero test.

use liesym::expr::{is_zero, Var};
use liesym::parser::{emit_expr, parse_expr};

fn main() {
    let e = parse_expr("(x + y)^2 - x^2 - 2*x*y").unwrap();
    println!("(x + y)^2 - x^2 - 2*x*y  ->  {}", emit_expr(&e));

    let f = parse_expr("exp(-x)*sin(y) + x^3*cos(2*y)").unwrap();
    println!("d/dx {}  =  {}", f, f.diff(Var::X));
    println!("d/dy {}  =  {}", f, f.diff(Var::Y));

    let id = parse_expr("sin(x)^2 + cos(x)^2 - 1").unwrap();
    println!("sin(x)^2 + cos(x)^2 - 1 is {:?}", is_zero(&id));
}
