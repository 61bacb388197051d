//! Recognisers and helpers for the two worked equation classes: the
//! generalised Laplace equation and the two-function plasma equation.

use crate::expr::{collect_atoms, is_zero, together, Expr, Var};
use crate::parser::PdeSpec;
use crate::poly::ParamPoly;

/// `u_xx + u_yy = alpha F(u)`.
pub fn is_laplace_shape(spec: &PdeSpec) -> bool {
    spec.num_terms() == 1
        && spec.a12.is_zero_node()
        && spec.a22.is_one()
        && spec.b1.is_zero_node()
        && spec.b2.is_zero_node()
}

/// `u_xx + u_yy + (a/x) u_x = alpha F1(u) + c F2(u)` with constant `a, c`.
pub fn is_gss_shape(spec: &PdeSpec) -> bool {
    if spec.num_terms() != 2 || !spec.a12.is_zero_node() || !spec.a22.is_one() || !spec.b2.is_zero_node() {
        return false;
    }
    let a = &spec.b1 * &Expr::x();
    let constant = |e: &Expr| !e.depends_on_any(&[Var::X, Var::Y, Var::U]) && !e.has_any_function();
    !spec.b1.is_zero_node() && constant(&a) && constant(&spec.alphas[1])
}

/// `alpha (Phi_xx - Phi_yy) + alpha_x Phi_x - alpha_y Phi_y - alpha C` for
/// the potential `Phi(x, y)` with `xi = Phi_x`, `eta = -Phi_y`.
pub fn laplace_potential_equation(alpha: &Expr, c: &Expr) -> Expr {
    let phi = Expr::func("Phi", vec![Expr::x(), Expr::y()]);
    let px = phi.diff(Var::X);
    let py = phi.diff(Var::Y);
    Expr::add_all([
        alpha * &(px.diff(Var::X) - py.diff(Var::Y)),
        &alpha.diff(Var::X) * &px,
        (&alpha.diff(Var::Y) * &py).neg(),
        (alpha * c).neg(),
    ])
}

fn ratio(a: &ParamPoly, b: &ParamPoly) -> Option<ParamPoly> {
    if let Some(c) = b.as_constant() {
        return Some(a.scale(&c.recip()));
    }
    let (ma, ca) = a.lead_term()?;
    let (mb, cb) = b.lead_term()?;
    if ma != mb {
        return None;
    }
    let r = ParamPoly::constant(ca / cb);
    a.sub(&b.mul(&r)).is_zero().then_some(r)
}

/// The constant `r = (x alpha_x + y alpha_y) / alpha`, if it is one.
pub fn gss_alpha_form(alpha: &Expr) -> Option<Expr> {
    if alpha.is_zero_node() {
        return None;
    }
    let n = &Expr::x() * &alpha.diff(Var::X) + &Expr::y() * &alpha.diff(Var::Y);
    let (na, aa) = (collect_atoms(&together(&n)), collect_atoms(&together(alpha)));
    let r = match aa.iter().next() {
        None => return None,
        Some((atom, c)) => match na.get(atom) {
            Some(cn) => ratio(cn, c)?,
            None => ParamPoly::zero(),
        },
    };
    let r = r.to_expr();
    is_zero(&(n - &r * alpha)).is_identically_zero().then_some(r)
}
