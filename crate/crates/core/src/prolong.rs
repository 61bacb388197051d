//! Second prolongation of point vector fields and the determining system of
//! a quasi-linear equation `E[u] = sum_l alpha_l F_l(u)`.

use std::collections::BTreeMap;

use crate::expr::{is_zero, Expr, Node, Var};
use crate::parser::PdeSpec;

/// Point vector field `xi d/dx + eta d/dy + phi d/du`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub xi: Expr,
    pub eta: Expr,
    pub phi: Expr,
}

impl Generator {
    pub fn new(xi: Expr, eta: Expr, phi: Expr) -> Generator {
        Generator { xi, eta, phi }
    }

    /// Reduced form with `phi = A + u B`.
    pub fn reduced(xi: Expr, eta: Expr, a: Expr, b: Expr) -> Generator {
        let phi = a + Expr::u() * b;
        Generator { xi, eta, phi }
    }

    pub fn zero() -> Generator {
        Generator::new(Expr::zero(), Expr::zero(), Expr::zero())
    }

    /// Unknown components `xi(x,y,u)`, `eta(x,y,u)`, `phi(x,y,u)`.
    pub fn symbolic() -> Generator {
        let args = vec![Expr::x(), Expr::y(), Expr::u()];
        Generator::new(
            Expr::func("xi", args.clone()),
            Expr::func("eta", args.clone()),
            Expr::func("phi", args),
        )
    }

    /// Unknown reduced components `xi(x,y)`, `eta(x,y)`, `A(x,y)`, `B(x,y)`.
    pub fn symbolic_reduced() -> Generator {
        let args = vec![Expr::x(), Expr::y()];
        Generator::reduced(
            Expr::func("xi", args.clone()),
            Expr::func("eta", args.clone()),
            Expr::func("A", args.clone()),
            Expr::func("B", args),
        )
    }

    /// `B = phi_u`, meaningful when `phi` is affine in `u`.
    pub fn b(&self) -> Expr {
        self.phi.diff(Var::U)
    }

    /// `A = phi - u phi_u`.
    pub fn a(&self) -> Expr {
        &self.phi - &(Expr::u() * self.b())
    }

    /// True if `xi_u = eta_u = phi_uu = 0` holds identically.
    pub fn is_reduced(&self) -> bool {
        is_zero(&self.xi.diff(Var::U)).is_identically_zero()
            && is_zero(&self.eta.diff(Var::U)).is_identically_zero()
            && is_zero(&self.phi.diff(Var::U).diff(Var::U)).is_identically_zero()
    }

    pub fn add(&self, o: &Generator) -> Generator {
        Generator::new(&self.xi + &o.xi, &self.eta + &o.eta, &self.phi + &o.phi)
    }

    pub fn scale(&self, c: &Expr) -> Generator {
        Generator::new(c * &self.xi, c * &self.eta, c * &self.phi)
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Generator {
        Generator::new(f(&self.xi), f(&self.eta), f(&self.phi))
    }

    pub fn is_zero(&self) -> bool {
        self.xi.is_zero_node() && self.eta.is_zero_node() && self.phi.is_zero_node()
    }

    /// Applies the field to a function of (x, y, u).
    pub fn apply_to(&self, f: &Expr) -> Expr {
        Expr::add_all([
            &self.xi * &f.diff(Var::X),
            &self.eta * &f.diff(Var::Y),
            &self.phi * &f.diff(Var::U),
        ])
    }

    /// `xi = ..., eta = ..., phi = ...` on one line.
    pub fn describe(&self) -> String {
        format!("xi = {}, eta = {}, phi = {}", self.xi, self.eta, self.phi)
    }
}

/// Total derivative with respect to x, truncated at second-order jets.
pub fn total_dx(f: &Expr) -> Expr {
    Expr::add_all([
        f.diff(Var::X),
        Expr::var(Var::Ux) * f.diff(Var::U),
        Expr::var(Var::Uxx) * f.diff(Var::Ux),
        Expr::var(Var::Uxy) * f.diff(Var::Uy),
    ])
}

pub fn total_dy(f: &Expr) -> Expr {
    Expr::add_all([
        f.diff(Var::Y),
        Expr::var(Var::Uy) * f.diff(Var::U),
        Expr::var(Var::Uxy) * f.diff(Var::Ux),
        Expr::var(Var::Uyy) * f.diff(Var::Uy),
    ])
}

#[derive(Clone, Debug)]
pub struct Prolongation {
    pub phi_x: Expr,
    pub phi_y: Expr,
    pub phi_xx: Expr,
    pub phi_xy: Expr,
    pub phi_yy: Expr,
}

pub fn second_prolongation(g: &Generator) -> Prolongation {
    let ux = Expr::var(Var::Ux);
    let uy = Expr::var(Var::Uy);
    let uxx = Expr::var(Var::Uxx);
    let uxy = Expr::var(Var::Uxy);
    let uyy = Expr::var(Var::Uyy);
    let (dxi_x, dxi_y) = (total_dx(&g.xi), total_dy(&g.xi));
    let (deta_x, deta_y) = (total_dx(&g.eta), total_dy(&g.eta));

    let phi_x = total_dx(&g.phi) - &ux * &dxi_x - &uy * &deta_x;
    let phi_y = total_dy(&g.phi) - &ux * &dxi_y - &uy * &deta_y;
    let phi_xx = total_dx(&phi_x) - &uxx * &dxi_x - &uxy * &deta_x;
    let phi_xy = total_dy(&phi_x) - &uxx * &dxi_y - &uxy * &deta_y;
    let phi_yy = total_dy(&phi_y) - &uxy * &dxi_y - &uyy * &deta_y;
    Prolongation {
        phi_x,
        phi_y,
        phi_xx,
        phi_xy,
        phi_yy,
    }
}

/// `Delta = E[u] - sum alpha_l F_l(u)` in jet coordinates.
pub fn delta(spec: &PdeSpec) -> Expr {
    let mut terms = vec![
        &spec.a11 * &Expr::var(Var::Uxx),
        &spec.a12 * &Expr::var(Var::Uxy),
        &spec.a22 * &Expr::var(Var::Uyy),
        &spec.b1 * &Expr::var(Var::Ux),
        &spec.b2 * &Expr::var(Var::Uy),
    ];
    for (a, f) in spec.alphas.iter().zip(spec.f_exprs()) {
        terms.push((a * &f).neg());
    }
    Expr::add_all(terms)
}

/// Value of `u_xx` on the solution manifold.
pub fn on_shell_uxx(spec: &PdeSpec) -> Expr {
    let d = delta(spec);
    // a11 = 1 after loading, so Delta = u_xx + rest.
    let rest = d.subst_var(Var::Uxx, &Expr::zero());
    rest.neg()
}

/// `X^(2) Delta` before restriction to `Delta = 0`.
pub fn prolonged_delta(spec: &PdeSpec, g: &Generator) -> Expr {
    let d = delta(spec);
    let pr = second_prolongation(g);
    Expr::add_all([
        &g.xi * &d.diff(Var::X),
        &g.eta * &d.diff(Var::Y),
        &g.phi * &d.diff(Var::U),
        &pr.phi_x * &d.diff(Var::Ux),
        &pr.phi_y * &d.diff(Var::Uy),
        &pr.phi_xx * &d.diff(Var::Uxx),
        &pr.phi_xy * &d.diff(Var::Uxy),
        &pr.phi_yy * &d.diff(Var::Uyy),
    ])
}

/// `X^(2) Delta |_{Delta = 0}`.
pub fn on_shell_residual(spec: &PdeSpec, g: &Generator) -> Expr {
    prolonged_delta(spec, g).subst_var(Var::Uxx, &on_shell_uxx(spec))
}

/// Exponents of (u_x, u_y, u_xy, u_yy).
pub type JetMonomial = [u32; 4];

const JETS: [Var; 4] = [Var::Ux, Var::Uy, Var::Uxy, Var::Uyy];

pub fn jet_label(m: &JetMonomial) -> String {
    let mut parts = Vec::new();
    for (v, e) in JETS.iter().zip(m.iter()) {
        match e {
            0 => {}
            1 => parts.push(v.name().to_string()),
            _ => parts.push(format!("{}^{e}", v.name())),
        }
    }
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

/// Coefficients of the jet monomials of an expression polynomial in
/// (u_x, u_y, u_xy, u_yy).
pub fn collect_jets(e: &Expr) -> BTreeMap<JetMonomial, Expr> {
    let mut groups: BTreeMap<JetMonomial, Vec<Expr>> = BTreeMap::new();
    for t in e.terms() {
        let mut key = [0u32; 4];
        let mut rest = Vec::new();
        let (c, m) = t.split_coef();
        rest.push(Expr::constant(c));
        for f in crate::expr::factors(&m) {
            let (b, x) = crate::expr::base_exp(&f);
            let slot = match b.node() {
                Node::Var(v) => JETS.iter().position(|j| j == v),
                _ => None,
            };
            match (slot, x.as_integer()) {
                (Some(i), Some(n)) if n > 0 => key[i] += n as u32,
                _ => rest.push(f),
            }
        }
        groups.entry(key).or_default().push(Expr::mul_all(rest));
    }
    groups
        .into_iter()
        .map(|(k, v)| (k, Expr::add_all(v)))
        .filter(|(_, v)| !v.is_zero_node())
        .collect()
}

#[derive(Clone, Debug)]
pub struct Equation {
    /// Jet monomial (and power of u, for split systems) the equation is the
    /// coefficient of.
    pub label: String,
    pub expr: Expr,
}

#[derive(Clone, Debug)]
pub struct DeterminingSystem {
    pub equations: Vec<Equation>,
    /// Index into `equations` of the member involving the F_l, if unique.
    pub f_dependent: Option<usize>,
    /// Fast-path p-vector, present for reduced generators.
    pub p: Option<Vec<Expr>>,
}

impl DeterminingSystem {
    pub fn f_dependent_expr(&self) -> Option<&Expr> {
        self.f_dependent.map(|i| &self.equations[i].expr)
    }

    /// Equations free of the F_l.
    pub fn f_free(&self) -> Vec<&Equation> {
        self.equations
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != self.f_dependent)
            .map(|(_, e)| e)
            .collect()
    }
}

fn mentions_f(spec: &PdeSpec, e: &Expr) -> bool {
    let names = spec.arbitrary_names();
    if names.is_empty() {
        // Concrete F: anything depending on u through the F_l counts.
        return e.depends_on(Var::U);
    }
    e.contains_function(&|n| names.iter().any(|m| m == n))
}

/// Coefficients of the on-shell residual over the jet monomials.
pub fn determining_system(spec: &PdeSpec, g: &Generator) -> DeterminingSystem {
    let res = on_shell_residual(spec, g);
    let equations: Vec<Equation> = collect_jets(&res)
        .into_iter()
        .map(|(k, e)| Equation {
            label: jet_label(&k),
            expr: e,
        })
        .collect();
    let deps: Vec<usize> = equations
        .iter()
        .enumerate()
        .filter(|(_, e)| mentions_f(spec, &e.expr))
        .map(|(i, _)| i)
        .collect();
    let p = if g.is_reduced() {
        Some(p_coefficients(spec, g))
    } else {
        None
    };
    DeterminingSystem {
        f_dependent: if deps.len() == 1 { Some(deps[0]) } else { None },
        equations,
        p,
    }
}

/// Determining system for a reduced generator with the F-free members split
/// further by powers of u; the result is a system in (x, y) plus the single
/// F-dependent equation.
pub fn reduced_system(spec: &PdeSpec, g: &Generator) -> DeterminingSystem {
    let base = determining_system(spec, g);
    let mut equations = Vec::new();
    let mut f_dependent = None;
    for (i, eq) in base.equations.into_iter().enumerate() {
        if Some(i) == base.f_dependent || mentions_f(spec, &eq.expr) {
            f_dependent = Some(equations.len());
            equations.push(eq);
            continue;
        }
        match eq.expr.poly_coeffs(Var::U) {
            Some(cs) => {
                for (k, c) in cs.into_iter().enumerate() {
                    if c.is_zero_node() {
                        continue;
                    }
                    let label = match k {
                        0 => eq.label.clone(),
                        1 => format!("{}*u", eq.label),
                        _ => format!("{}*u^{k}", eq.label),
                    };
                    equations.push(Equation { label, expr: c });
                }
            }
            None => equations.push(eq),
        }
    }
    DeterminingSystem {
        equations,
        f_dependent,
        p: base.p,
    }
}

/// The fast-path p-vector of length 3L+2 for a reduced generator.
pub fn p_coefficients(spec: &PdeSpec, g: &Generator) -> Vec<Expr> {
    let l = spec.num_terms();
    let a = g.a();
    let b = g.b();
    let xi_x = g.xi.diff(Var::X);
    let xi_y = g.xi.diff(Var::Y);
    // On the other determining equations 2 xi_x = xi_x + eta_y; the 2 xi_x
    // form is exact for every spec.
    let stretch = xi_x.scale(&crate::expr::int(2)) + &spec.a12 * &xi_y;
    let mut p = vec![Expr::zero(); 3 * l + 2];
    for (i, al) in spec.alphas.iter().enumerate() {
        p[i] = Expr::add_all([
            &b * al,
            (&stretch * al).neg(),
            (&g.xi * &al.diff(Var::X)).neg(),
            (&g.eta * &al.diff(Var::Y)).neg(),
        ]);
        p[l + i] = (al * &a).neg();
        p[2 * l + i] = (al * &b).neg();
    }
    p[3 * l] = spec.operator(&b);
    p[3 * l + 1] = spec.operator(&a);
    p
}

/// The family `(F_l, F'_l, u F'_l, u, 1)` for the spec's F_l.
pub fn family_exprs(spec: &PdeSpec) -> Vec<Expr> {
    let fs = spec.f_exprs();
    let mut out: Vec<Expr> = fs.clone();
    out.extend(fs.iter().map(|f| f.diff(Var::U)));
    out.extend(fs.iter().map(|f| Expr::u() * f.diff(Var::U)));
    out.push(Expr::u());
    out.push(Expr::one());
    out
}

/// `sum_i p_i f_i`.
pub fn contract(p: &[Expr], f: &[Expr]) -> Expr {
    Expr::add_all(p.iter().zip(f).map(|(a, b)| a * b))
}

/// True if the F-dependent equation from full prolongation equals the
/// fast-path contraction `sum p_i f_i` identically.
pub fn cross_check(spec: &PdeSpec, g: &Generator) -> bool {
    let sys = determining_system(spec, g);
    let full = sys
        .equations
        .iter()
        .find(|e| e.label == "1")
        .map(|e| e.expr.clone())
        .unwrap_or_else(Expr::zero);
    let fast = contract(&p_coefficients(spec, g), &family_exprs(spec));
    is_zero(&(full - fast)).is_identically_zero()
}

/// Outcome of the structural check that the determining system forces a
/// reduced generator and isolates a single F-dependent equation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureReport {
    /// The equations involving only `xi_u`, `eta_u` have rank 2.
    pub forces_xi_eta_u: bool,
    /// With `xi`, `eta` independent of u, some equation is a nonzero
    /// multiple of `phi_uu` alone.
    pub forces_phi_uu: bool,
    /// Number of F-dependent equations in the reduced system.
    pub f_dependent_count: usize,
}

impl StructureReport {
    pub fn holds(&self) -> bool {
        self.forces_xi_eta_u && self.forces_phi_uu && self.f_dependent_count == 1
    }
}

fn is_slot_derivative(e: &Expr, name: &str, derivs: &[u32]) -> bool {
    matches!(e.node(), Node::Apply { name: n, derivs: d, .. } if n == name && d == derivs)
}

/// Splits `e` as a linear form in the given unknown-function atoms,
/// returning `None` if any other unknown-function factor appears.
fn linear_form(e: &Expr, unknowns: &[(&str, [u32; 3])]) -> Option<Vec<Expr>> {
    let mut coeffs = vec![Vec::new(); unknowns.len()];
    for t in e.terms() {
        let (c, m) = t.split_coef();
        let mut which = None;
        let mut rest = vec![Expr::constant(c)];
        for f in crate::expr::factors(&m) {
            let hit = unknowns.iter().position(|(n, d)| is_slot_derivative(&f, n, d));
            match hit {
                Some(i) if which.is_none() => which = Some(i),
                _ => {
                    if f.contains_function(&|n| matches!(n, "xi" | "eta" | "phi")) {
                        return None;
                    }
                    rest.push(f)
                }
            }
        }
        coeffs[which?].push(Expr::mul_all(rest));
    }
    Some(coeffs.into_iter().map(Expr::add_all).collect())
}

/// Evaluates the determining-system structure on the full determining system.
pub fn determining_structure(spec: &PdeSpec) -> StructureReport {
    use crate::expr::{eval_numeric, rat};
    let full = determining_system(spec, &Generator::symbolic());
    let unknowns = [("xi", [0, 0, 1]), ("eta", [0, 0, 1])];
    let rows: Vec<Vec<Expr>> = full
        .equations
        .iter()
        .filter_map(|e| linear_form(&e.expr, &unknowns))
        .collect();
    // Generic point; coefficients are polynomial in (x, y) for these specs.
    let point: BTreeMap<Var, crate::expr::Rational> =
        [(Var::X, rat(7, 5)), (Var::Y, rat(-3, 4)), (Var::U, rat(2, 3))].into();
    let mut numeric: Vec<Vec<crate::expr::Rational>> = Vec::new();
    for r in &rows {
        let vals: Option<Vec<_>> = r
            .iter()
            .map(|c| {
                exact_value(c, &point).or_else(|| {
                    eval_numeric(c, &point, &BTreeMap::new(), 128)
                        .ok()
                        .map(|f| crate::linalg::float_to_rational(&f))
                })
            })
            .collect();
        if let Some(v) = vals {
            numeric.push(v);
        }
    }
    let forces_xi_eta_u = crate::linalg::rank(&numeric) == 2;

    let args = vec![Expr::x(), Expr::y()];
    let g2 = Generator::new(
        Expr::func("xi", args.clone()),
        Expr::func("eta", args),
        Expr::func("phi", vec![Expr::x(), Expr::y(), Expr::u()]),
    );
    let sys2 = determining_system(spec, &g2);
    let forces_phi_uu = sys2.equations.iter().any(|e| {
        linear_form(&e.expr, &[("phi", [0, 0, 2])])
            .map(|c| {
                let c = &c[0];
                !c.is_zero_node() && !c.depends_on(Var::U) && !c.has_any_function()
            })
            .unwrap_or(false)
    });

    let red = reduced_system(spec, &Generator::symbolic_reduced());
    let count = red.equations.iter().filter(|e| mentions_f(spec, &e.expr)).count();
    StructureReport {
        forces_xi_eta_u,
        forces_phi_uu,
        f_dependent_count: count,
    }
}

/// Exact value of a parameter-free expression built from rationals by
/// ring operations and integer powers.
pub fn exact_value(e: &Expr, point: &BTreeMap<Var, crate::expr::Rational>) -> Option<crate::expr::Rational> {
    use num_traits::{One, Zero};
    match e.node() {
        Node::Const(q) => Some(q.clone()),
        Node::Var(v) => point.get(v).cloned(),
        Node::Sum(ts) => ts.iter().try_fold(crate::expr::Rational::zero(), |acc, t| {
            Some(acc + exact_value(t, point)?)
        }),
        Node::Product(fs) => fs.iter().try_fold(crate::expr::Rational::one(), |acc, t| {
            Some(acc * exact_value(t, point)?)
        }),
        Node::Pow(b, x) => {
            let n = x.as_integer()?;
            let v = exact_value(b, point)?;
            if n < 0 && v.is_zero() {
                return None;
            }
            Some(num_traits::pow::Pow::pow(v, n as i32))
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_expr, parse_spec};

    fn p(s: &str) -> Expr {
        parse_expr(s).unwrap()
    }

    #[test]
    fn scaling_prolongs_linearly() {
        let pr = second_prolongation(&Generator::new(Expr::zero(), Expr::zero(), Expr::u()));
        assert_eq!(pr.phi_x, Expr::var(Var::Ux));
        assert_eq!(pr.phi_xx, Expr::var(Var::Uxx));
    }

    #[test]
    fn dilation_prolongation() {
        let pr = second_prolongation(&Generator::new(Expr::x(), Expr::y(), Expr::zero()));
        assert_eq!(pr.phi_x, Expr::var(Var::Ux).neg());
        assert_eq!(pr.phi_xx, Expr::var(Var::Uxx).scale(&crate::expr::int(-2)));
        assert_eq!(pr.phi_xy, Expr::var(Var::Uxy).scale(&crate::expr::int(-2)));
    }

    #[test]
    fn shift_prolongation() {
        let a = Expr::func("A", vec![Expr::x(), Expr::y()]);
        let pr = second_prolongation(&Generator::new(Expr::zero(), Expr::zero(), a.clone()));
        assert_eq!(pr.phi_xx, a.diff(Var::X).diff(Var::X));
    }

    #[test]
    fn zero_field_has_zero_p() {
        let s = parse_spec("a22 = 1\nalpha1 = x\nF1 = arbitrary\n").unwrap();
        assert!(p_coefficients(&s, &Generator::zero()).iter().all(|e| e.is_zero_node()));
    }

    #[test]
    fn laplace_power_p_vector() {
        let s = parse_spec("a22 = 1\nalpha1 = x^r\nF1 = arbitrary\nparams = r, m\n").unwrap();
        let g = Generator::reduced(p("(m-1)*x"), p("(m-1)*y"), Expr::zero(), p("-(r+2)"));
        let pv = p_coefficients(&s, &g);
        assert!(pv[1].is_zero_node() && pv[3].is_zero_node() && pv[4].is_zero_node());
        let combo = &pv[0] + &(p("m") * pv[2].clone());
        assert!(is_zero(&combo).is_identically_zero(), "{combo}");
    }

    #[test]
    fn exp_kernel_generator_has_zero_p() {
        let s = parse_spec("a22 = 1\nalpha1 = exp(2*x)\nF1 = arbitrary\n").unwrap();
        let g = Generator::reduced(p("exp(-x)*cos(y)"), p("-exp(-x)*sin(y)"), Expr::zero(), Expr::zero());
        for e in p_coefficients(&s, &g) {
            assert!(is_zero(&e).is_identically_zero(), "{e}");
        }
    }

    #[test]
    fn cross_check_laplace_and_gss() {
        let lap = parse_spec("a22 = 1\nalpha1 = x^r\nF1 = arbitrary\nparams = r\n").unwrap();
        assert!(cross_check(&lap, &Generator::symbolic_reduced()));
        let gss = parse_spec(
            "a22 = 1\nb1 = a/x\nalpha1 = x^2\nalpha2 = 1\nF1 = arbitrary(F)\nF2 = arbitrary(G)\nparams = a\n",
        )
        .unwrap();
        assert!(cross_check(&gss, &Generator::symbolic_reduced()));
    }

    #[test]
    fn structure_of_general_system() {
        let s = parse_spec("a12 = x\na22 = 2+y^2\nb1 = y\nalpha1 = x*y\nF1 = arbitrary\n").unwrap();
        let r = determining_structure(&s);
        assert!(r.holds(), "{r:?}");
    }
}
