//! The function family `(F_l, F'_l, u F'_l, u, 1)` and its constant-vector
//! linear relations.

use std::collections::BTreeMap;

use astro_float::BigFloat;

use super::ClassifyError;
use crate::expr::{base_exp, collect_atoms, factors, rat, Builtin, Expr, Node, NumEnv, Rational, Var};
use crate::linalg::{self, Conditions};
use crate::parser::FunctionSpec;
use crate::poly::ParamPoly;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionFamily {
    pub l: usize,
    /// `D = 3L + 2` members in the fixed order.
    pub f: Vec<Expr>,
}

impl FunctionFamily {
    pub fn dim(&self) -> usize {
        self.f.len()
    }

    /// Family built from explicit functions of u (no linearity check).
    pub fn from_exprs(fs: &[Expr]) -> FunctionFamily {
        let mut f: Vec<Expr> = fs.to_vec();
        f.extend(fs.iter().map(|e| e.diff(Var::U)));
        f.extend(fs.iter().map(|e| Expr::u() * e.diff(Var::U)));
        f.push(Expr::u());
        f.push(Expr::one());
        FunctionFamily { l: fs.len(), f }
    }

    /// Family with parameters substituted.
    pub fn subst(&self, sigma: &BTreeMap<String, ParamPoly>) -> FunctionFamily {
        FunctionFamily {
            l: self.l,
            f: self.f.iter().map(|e| subst_params(e, sigma)).collect(),
        }
    }

    /// True if some F_l is affine in u.
    pub fn has_linear_member(&self) -> bool {
        self.f[..self.l]
            .iter()
            .any(|e| e.diff(Var::U).diff(Var::U).is_zero_node())
    }

    /// Family member names, `F1`, `F1'`, `u*F1'`, `u` and `1`.
    pub fn labels(&self) -> Vec<String> {
        let mut out = Vec::new();
        for i in 1..=self.l {
            out.push(format!("F{i}"));
        }
        for i in 1..=self.l {
            out.push(format!("F{i}'"));
        }
        for i in 1..=self.l {
            out.push(format!("u*F{i}'"));
        }
        out.push("u".into());
        out.push("1".into());
        out
    }
}

pub(crate) fn subst_params(e: &Expr, sigma: &BTreeMap<String, ParamPoly>) -> Expr {
    let b: crate::expr::Bindings = sigma
        .iter()
        .map(|(p, v)| {
            (
                crate::expr::Symbol::Param(p.clone()),
                crate::expr::Binding::Value(v.to_expr()),
            )
        })
        .collect();
    e.subst(&b)
}

pub fn function_family(fs: &[FunctionSpec]) -> Result<FunctionFamily, ClassifyError> {
    if let Some(i) = fs.iter().position(|f| f.is_linear()) {
        return Err(ClassifyError::LinearF(i + 1));
    }
    let exprs: Vec<Expr> = fs
        .iter()
        .map(|f| match f {
            FunctionSpec::Arbitrary { name } => Expr::func(name, vec![Expr::u()]),
            other => other.body().expect("concrete"),
        })
        .collect();
    Ok(FunctionFamily::from_exprs(&exprs))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Confidence {
    Symbolic,
    NumericSampled,
}

#[derive(Clone, Debug)]
pub struct RelationBasis {
    pub d: usize,
    /// Relation vectors; entries may be polynomials in parameters.
    pub relations: Vec<Vec<ParamPoly>>,
    pub confidence: Confidence,
}

impl RelationBasis {
    /// Dimension `k` of the span of the family.
    pub fn rank(&self) -> usize {
        self.d - self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    /// Rational relation vectors, if no entry carries parameters.
    pub fn rational(&self) -> Option<Vec<Vec<Rational>>> {
        self.relations
            .iter()
            .map(|v| v.iter().map(|e| e.as_constant()).collect())
            .collect()
    }

    /// `sum_i lambda_i f_i = 0` for each relation, written with the labels.
    pub fn describe(&self, fam: &FunctionFamily) -> Vec<String> {
        let rows: Vec<Vec<Expr>> = self
            .relations
            .iter()
            .map(|v| v.iter().map(|c| c.to_expr()).collect())
            .collect();
        describe_rows(&rows, &fam.labels())
    }
}

/// `c1*F1 + ... = 0` for each row of coefficients over the labels.
pub fn describe_rows(rows: &[Vec<Expr>], labels: &[String]) -> Vec<String> {
    rows.iter()
        .map(|v| {
            let terms: Vec<String> = v
                .iter()
                .zip(labels)
                .filter(|(c, _)| !c.is_zero_node())
                .map(|(c, l)| {
                    let c = crate::parser::emit_expr(c);
                    match (c.as_str(), l.as_str()) {
                        (c, "1") => c.to_string(),
                        ("1", l) => l.to_string(),
                        ("-1", l) => format!("-{l}"),
                        (c, l) if c.contains(['+', ' ']) => format!("({c})*{l}"),
                        (c, l) => format!("{c}*{l}"),
                    }
                })
                .collect();
            format!("{} = 0", terms.join(" + ").replace("+ -", "- "))
        })
        .collect()
}

/// One parameter case of the relation analysis.
#[derive(Clone, Debug)]
pub struct RelationBranch {
    pub conditions: Conditions,
    pub basis: RelationBasis,
    /// Set when the case is excluded, e.g. because F becomes linear.
    pub excluded: Option<String>,
}

// (power of u, coefficient of u in exp, remaining trigonometric factors)
type Signature = (Expr, Expr, Expr);

fn signature(atom: &Expr) -> Option<Signature> {
    let mut pow = Expr::zero();
    let mut rate = Expr::zero();
    let mut trig = Vec::new();
    for f in factors(atom) {
        let (b, x) = base_exp(&f);
        match b.node() {
            Node::Var(Var::U) => pow = pow + x,
            Node::Call(Builtin::Exp, a) if x.is_one() && linear_in_u(a) => {
                rate = rate + a.diff(Var::U);
                let c = a.subst_var(Var::U, &Expr::zero());
                if !c.is_zero_node() {
                    trig.push(Expr::exp(c));
                }
            }
            Node::Call(Builtin::Sin | Builtin::Cos, a)
                if linear_in_u(a) && x.as_integer() == Some(1) && !a.contains_any_param() =>
            {
                trig.push(f.clone())
            }
            Node::Param(_) => trig.push(f.clone()),
            _ if !f.depends_on(Var::U) => trig.push(f.clone()),
            _ => return None,
        }
    }
    Some((pow, rate, Expr::mul_all(trig)))
}

fn linear_in_u(a: &Expr) -> bool {
    !a.diff(Var::U).depends_on(Var::U)
}

trait ParamScan {
    fn contains_any_param(&self) -> bool;
}

impl ParamScan for Expr {
    fn contains_any_param(&self) -> bool {
        !self.params().is_empty()
    }
}

/// Parameter assignments under which two distinct atoms merge.
fn collisions(atoms: &[Expr]) -> Option<Vec<(String, ParamPoly)>> {
    let sigs: Vec<Signature> = atoms.iter().map(signature).collect::<Option<_>>()?;
    let mut out: Vec<(String, ParamPoly)> = Vec::new();
    for i in 0..sigs.len() {
        for j in i + 1..sigs.len() {
            let (p1, r1, t1) = &sigs[i];
            let (p2, r2, t2) = &sigs[j];
            if t1 != t2 {
                continue;
            }
            let (Some(dp), Some(dr)) = (ParamPoly::from_expr(&(p1 - p2)), ParamPoly::from_expr(&(r1 - r2))) else {
                continue;
            };
            if dp.is_nonzero_constant() || dr.is_nonzero_constant() {
                continue;
            }
            let (solve, other) = if dp.is_zero() { (&dr, &dp) } else { (&dp, &dr) };
            let cands: Vec<(String, ParamPoly)> = if let Some((n, v)) = solve.linear_solutions().into_iter().next() {
                vec![(n, v)]
            } else if let Some((n, roots)) = solve.univariate_rational_roots() {
                roots.into_iter().map(|r| (n.clone(), ParamPoly::constant(r))).collect()
            } else {
                Vec::new()
            };
            for (n, v) in cands {
                let one: BTreeMap<String, ParamPoly> = [(n.clone(), v.clone())].into();
                if other.subst_all(&one).is_zero() && !out.contains(&(n.clone(), v.clone())) {
                    out.push((n, v));
                }
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.to_expr().cmp(&b.1.to_expr())));
    Some(out)
}

/// Coefficient matrix of the family over its atoms, or `None` if some
/// member has an unsupported atom.
fn atom_matrix(fam: &FunctionFamily) -> Option<(Vec<Expr>, Vec<Vec<ParamPoly>>)> {
    let cols: Vec<_> = fam.f.iter().map(collect_atoms).collect();
    let mut atoms: Vec<Expr> = cols.iter().flat_map(|c| c.keys().cloned()).collect();
    atoms.sort();
    atoms.dedup();
    if atoms.iter().any(|a| signature(a).is_none()) {
        return None;
    }
    let rows = atoms
        .iter()
        .map(|a| cols.iter().map(|c| c.get(a).cloned().unwrap_or_default()).collect())
        .collect();
    Some((atoms, rows))
}

/// Relation basis for the generic parameter case only.
pub fn detect_relations(fam: &FunctionFamily) -> Result<RelationBasis, ClassifyError> {
    let branches = relation_branches(fam, &Conditions::default())?;
    branches
        .into_iter()
        .find(|b| b.conditions.equalities.is_empty() && b.excluded.is_none())
        .map(|b| b.basis)
        .ok_or(ClassifyError::UnexpandableF)
}

/// All parameter cases of the relation analysis.
pub fn relation_branches(fam: &FunctionFamily, start: &Conditions) -> Result<Vec<RelationBranch>, ClassifyError> {
    if fam.f.iter().any(|e| e.has_any_function()) {
        // Arbitrary F: no relations hold identically.
        return Ok(vec![RelationBranch {
            conditions: start.clone(),
            basis: RelationBasis {
                d: fam.dim(),
                relations: Vec::new(),
                confidence: Confidence::Symbolic,
            },
            excluded: None,
        }]);
    }
    let Some((atoms, rows)) = atom_matrix(fam) else {
        return numeric_relations(fam).map(|b| {
            vec![RelationBranch {
                conditions: start.clone(),
                basis: b,
                excluded: None,
            }]
        });
    };
    let mut out = Vec::new();
    let cases = collisions(&atoms).unwrap_or_default();
    let mut generic = start.clone();
    for (name, value) in &cases {
        let mut cond = start.clone();
        if !cond.assign(name, value) {
            continue;
        }
        let mut poly = ParamPoly::param(name).sub(value);
        poly = poly.primitive();
        // Partial substitution: shrink the family, then recurse.
        let sub = fam.subst(&cond.equalities);
        if sub.has_linear_member() {
            out.push(RelationBranch {
                conditions: cond,
                basis: RelationBasis {
                    d: fam.dim(),
                    relations: Vec::new(),
                    confidence: Confidence::Symbolic,
                },
                excluded: Some("F is linear in u".into()),
            });
        } else {
            out.extend(relation_branches(&sub, &cond)?);
        }
        if !generic.assume_nonzero(&poly) {
            return Ok(out);
        }
    }
    for b in linalg::param_null_space(&rows, fam.dim(), &generic, linalg::DEFAULT_BRANCH_CAP)? {
        out.push(RelationBranch {
            conditions: b.conditions,
            basis: RelationBasis {
                d: fam.dim(),
                relations: b.basis,
                confidence: Confidence::Symbolic,
            },
            excluded: None,
        });
    }
    Ok(out)
}

/// Sampled fallback: evaluation matrix at `D + 4` points, null space at
/// 256 bits with rank tolerance 1e-40.
pub fn numeric_relations(fam: &FunctionFamily) -> Result<RelationBasis, ClassifyError> {
    if fam.f.iter().any(|e| !e.params().is_empty()) {
        return Err(ClassifyError::UnexpandableF);
    }
    let d = fam.dim();
    let bits = 256;
    let mut env = NumEnv::new(bits);
    let mut rows: Vec<Vec<BigFloat>> = Vec::new();
    let mut k = 0i64;
    while rows.len() < d + 4 && k < 4 * (d as i64 + 4) {
        let u = rat(7, 10) + rat(k, 9);
        k += 1;
        env.set_var(Var::U, &u);
        let row: Result<Vec<BigFloat>, _> = fam.f.iter().map(|e| env.eval(e)).collect();
        if let Ok(r) = row {
            rows.push(r);
        }
    }
    if rows.len() < d + 4 {
        return Err(ClassifyError::UnexpandableF);
    }
    let tol = env.rational(&Rational::new(
        1.into(),
        num_traits::pow(num_bigint::BigInt::from(10), 40),
    ));
    let ns = linalg::numeric_null_space(&rows, d, env.prec, &tol);
    Ok(RelationBasis {
        d,
        relations: ns
            .into_iter()
            .map(|v| v.into_iter().map(ParamPoly::constant).collect())
            .collect(),
        confidence: Confidence::NumericSampled,
    })
}

/// True if every relation annihilates the family identically.
pub fn relations_hold(fam: &FunctionFamily, basis: &RelationBasis) -> bool {
    basis.relations.iter().all(|v| {
        let e = Expr::add_all(v.iter().zip(&fam.f).map(|(c, f)| c.to_expr() * f.clone()));
        crate::expr::is_zero(&e).is_identically_zero()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::int;
    use crate::parser::parse_expr;

    fn fam(s: &str) -> FunctionFamily {
        FunctionFamily::from_exprs(&[parse_expr(s).unwrap()])
    }

    fn consts(v: &[i64]) -> Vec<ParamPoly> {
        v.iter().map(|&n| ParamPoly::int(n)).collect()
    }

    #[test]
    fn quadratic_has_two_relations() {
        let f = fam("u^2/2 + u");
        assert_eq!(
            f.f,
            ["u^2/2+u", "u+1", "u^2+u", "u", "1"]
                .iter()
                .map(|s| parse_expr(s).unwrap())
                .collect::<Vec<_>>()
        );
        let b = detect_relations(&f).unwrap();
        assert_eq!(b.relations.len(), 2);
        assert_eq!(b.rank(), 3);
        assert!(relations_hold(&f, &b));
        let expected = vec![
            vec![int(0), int(1), int(0), int(-1), int(-1)],
            vec![int(2), int(0), int(-1), int(-1), int(0)],
        ];
        assert!(linalg::same_span(&b.rational().unwrap(), &expected));
    }

    #[test]
    fn exponential_relation() {
        let b = detect_relations(&fam("exp(-u)")).unwrap();
        assert_eq!(b.relations, vec![consts(&[1, 1, 0, 0, 0])]);
    }

    #[test]
    fn sine_has_no_relation() {
        let b = detect_relations(&fam("sin(u)")).unwrap();
        assert!(b.is_empty());
    }

    #[test]
    fn power_family_branches() {
        let f = fam("u^m");
        let br = relation_branches(&f, &Conditions::default()).unwrap();
        let generic = br.iter().find(|b| b.conditions.equalities.is_empty()).unwrap();
        let m = ParamPoly::param("m");
        assert_eq!(
            generic.basis.relations,
            vec![vec![
                m.neg(),
                ParamPoly::zero(),
                ParamPoly::one(),
                ParamPoly::zero(),
                ParamPoly::zero()
            ]]
        );
        let excluded: Vec<_> = br.iter().filter(|b| b.excluded.is_some()).collect();
        assert_eq!(excluded.len(), 2);
        let two = br
            .iter()
            .find(|b| b.conditions.equalities.get("m") == Some(&ParamPoly::int(2)))
            .unwrap();
        assert_eq!(two.basis.relations.len(), 2);
    }

    #[test]
    fn numeric_fallback_matches_symbolic() {
        let f = fam("exp(u^2)");
        let b = detect_relations(&f).unwrap();
        assert_eq!(b.confidence, Confidence::NumericSampled);
        assert!(b.is_empty());
        let g = fam("exp(u^2) + u");
        let b = detect_relations(&g).unwrap();
        assert_eq!(b.confidence, Confidence::NumericSampled);
        assert!(b.is_empty());
        let h = FunctionFamily {
            l: 1,
            f: vec![
                parse_expr("ln(u)").unwrap(),
                parse_expr("u^(-1)").unwrap(),
                parse_expr("1").unwrap(),
                parse_expr("u").unwrap(),
                parse_expr("1").unwrap(),
            ],
        };
        let b = detect_relations(&h).unwrap();
        assert_eq!(b.confidence, Confidence::NumericSampled);
        assert_eq!(b.relations, vec![consts(&[0, 0, 1, 0, -1])]);
    }
}
