//! Symmetry classification: kernel of the symmetry groups, relation
//! analysis of the function family, orthogonality conditions and the
//! ansatz solve, with parameter branching.

mod ansatz;
mod family;
mod shapes;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub use ansatz::{
    assemble, coefficient_rows, component_strings, solve_in_ansatz, AnsatzBasis, AnsatzSolution, Unknown,
    DEFAULT_DEGREE,
};
pub use family::{
    detect_relations, function_family, numeric_relations, relation_branches, relations_hold, Confidence,
    FunctionFamily, RelationBasis, RelationBranch,
};
pub use shapes::{gss_alpha_form, is_gss_shape, is_laplace_shape, laplace_potential_equation};

use crate::expr::{collect_atoms, is_zero, together, Binding, Bindings, Expr, Rational, Symbol, TriState, Var};
use crate::linalg::{self, Conditions, LinalgError, Matrix, DEFAULT_BRANCH_CAP};
use crate::parser::{emit_expr, FunctionSpec, PdeSpec};
use crate::poly::ParamPoly;
use crate::prolong::{p_coefficients, reduced_system, Generator};
use crate::verify;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("F{0} is linear in u")]
    LinearF(usize),
    #[error("F cannot be expanded over supported atoms and has no numeric evaluator")]
    UnexpandableF,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

impl ClassifyError {
    pub fn is_branch_explosion(&self) -> bool {
        matches!(self, ClassifyError::Linalg(LinalgError::BranchExplosion(_)))
    }
}

// ---------------------------------------------------------------------------
// Constraint systems

fn arbitrary_version(spec: &PdeSpec) -> PdeSpec {
    let fs = (1..=spec.num_terms())
        .map(|i| FunctionSpec::Arbitrary { name: format!("F{i}") })
        .collect();
    spec.with_functions(fs)
}

/// Determining equations that do not involve the F_l, split by powers of u.
pub fn f_free_equations(spec: &PdeSpec) -> Vec<Expr> {
    let s = arbitrary_version(spec);
    let sys = reduced_system(&s, &Generator::symbolic_reduced());
    sys.f_free().into_iter().map(|e| e.expr.clone()).collect()
}

/// The p-vector in the unknowns `xi, eta, A, B`.
pub fn p_vector(spec: &PdeSpec) -> Vec<Expr> {
    p_coefficients(spec, &Generator::symbolic_reduced())
}

/// F-free equations joined with `p_i = 0` for every i.
pub fn kernel_conditions(spec: &PdeSpec) -> Vec<Expr> {
    let mut eqs = f_free_equations(spec);
    eqs.extend(p_vector(spec).into_iter().filter(|e| !e.is_zero_node()));
    eqs
}

/// Reduces relation rows on constant pivots. Returns the pivot columns and
/// the reduced rows, or `None` if some row has no constant entry to pivot on.
pub fn pivot_form(rels: &[Vec<ParamPoly>]) -> Option<(Vec<usize>, Vec<Vec<ParamPoly>>)> {
    let mut rows: Vec<Vec<ParamPoly>> = rels.to_vec();
    let mut pivots = Vec::new();
    let mut kept = Vec::new();
    for r in 0..rows.len() {
        if rows[r].iter().all(|e| e.is_zero()) {
            continue;
        }
        let c = (0..rows[r].len()).find(|&c| !pivots.contains(&c) && rows[r][c].is_nonzero_constant())?;
        let inv = rows[r][c].as_constant().unwrap().recip();
        rows[r] = rows[r].iter().map(|e| e.scale(&inv)).collect();
        for k in 0..rows.len() {
            if k == r || rows[k][c].is_zero() {
                continue;
            }
            let f = rows[k][c].clone();
            let sub: Vec<ParamPoly> = rows[r].iter().map(|e| e.mul(&f)).collect();
            for (a, b) in rows[k].iter_mut().zip(sub) {
                *a = a.sub(&b);
            }
        }
        pivots.push(c);
        kept.push(r);
    }
    Some((pivots, kept.into_iter().map(|r| rows[r].clone()).collect()))
}

/// Conditions for `p(x, y)` to lie pointwise in the span of the relations.
pub fn orthogonality_constraints(p: &[Expr], rels: &[Vec<ParamPoly>]) -> Vec<Expr> {
    if rels.is_empty() {
        return p.to_vec();
    }
    let d = p.len();
    let constant: Option<Matrix> = rels
        .iter()
        .map(|v| v.iter().map(|e| e.as_constant()).collect())
        .collect();
    let dot = |w: &[ParamPoly]| {
        Expr::add_all(
            w.iter()
                .zip(p)
                .filter(|(c, _)| !c.is_zero())
                .map(|(c, e)| c.to_expr() * e.clone()),
        )
    };
    let out: Vec<Expr> = if let Some(m) = constant {
        // Complement of the relation span, so that w . p = 0 for each w.
        linalg::null_space(&m, d)
            .into_iter()
            .map(|w| dot(&w.into_iter().map(ParamPoly::constant).collect::<Vec<_>>()))
            .collect()
    } else if let Some((pivots, rows)) = pivot_form(rels) {
        (0..d)
            .filter(|i| !pivots.contains(i))
            .map(|i| {
                let mut w = vec![ParamPoly::zero(); d];
                w[i] = ParamPoly::one();
                for (r, &c) in rows.iter().zip(&pivots) {
                    w[c] = r[i].neg();
                }
                dot(&w)
            })
            .collect()
    } else {
        // Rank-one condition through all 2x2 minors; only reached for a
        // single relation without a constant entry.
        let mut acc = Vec::new();
        for v in rels {
            for i in 0..d {
                for j in i + 1..d {
                    let e = v[j].to_expr() * p[i].clone() - v[i].to_expr() * p[j].clone();
                    acc.push(e);
                }
            }
        }
        acc
    };
    out.into_iter().filter(|e| !e.is_zero_node()).collect()
}

// ---------------------------------------------------------------------------
// Report types

#[derive(Clone, Debug)]
pub struct KernelCase {
    pub conditions: Conditions,
    pub generators: Vec<Generator>,
}

#[derive(Clone, Debug)]
pub struct ClassificationBranch {
    /// Relation pattern, e.g. `P,E`, when F is arbitrary.
    pub pattern: Option<String>,
    pub conditions: Conditions,
    /// Human-readable parameter constraints.
    pub constraints: Vec<String>,
    /// Parameter values fixed by a reparametrisation, as expressions.
    pub substitutions: BTreeMap<String, Expr>,
    pub relations: Vec<String>,
    pub solved_fs: Vec<Expr>,
    /// Generators beyond the kernel.
    pub generators: Vec<Generator>,
    /// Kernel generators present on this branch.
    pub kernel: Vec<Generator>,
    /// Symbolic residual of each generator, `None` where undecidable.
    pub verified: Vec<Option<TriState>>,
    pub notes: Vec<String>,
}

impl ClassificationBranch {
    /// The spec with the branch's F forms and parameter values.
    pub fn specialised_spec(&self, spec: &PdeSpec) -> PdeSpec {
        let s = spec.with_functions(
            self.solved_fs
                .iter()
                .map(|f| FunctionSpec::Concrete(f.clone()))
                .collect(),
        );
        if self.substitutions.is_empty() {
            s
        } else {
            s.subst_params(&self.substitutions)
        }
    }
}

#[derive(Clone, Debug)]
pub struct ManualCase {
    pub pattern: String,
    pub note: String,
    pub constraints: Vec<Expr>,
}

#[derive(Clone, Debug)]
pub struct LinearCase {
    /// `phi = c u + Psi(x, y)` with `xi = eta = 0`.
    pub generator: Generator,
    pub alpha_tilde: Expr,
    pub beta_tilde: Expr,
    /// `E[Psi] - alpha_tilde Psi + c beta_tilde`, to vanish.
    pub side_condition: Expr,
}

#[derive(Clone, Debug, Default)]
pub struct ClassificationReport {
    pub basis: String,
    /// Kernel generators for generic parameter values.
    pub kernel: Vec<Generator>,
    pub kernel_cases: Vec<KernelCase>,
    pub branches: Vec<ClassificationBranch>,
    /// Cases whose constraints admit nothing beyond the kernel.
    pub kernel_only: Vec<ClassificationBranch>,
    pub manual: Vec<ManualCase>,
    pub equivalence_moves: Vec<String>,
    pub notes: Vec<String>,
    pub potential_equation: Option<Expr>,
    /// Outcome of the alpha-form gate for the two-function shape.
    pub alpha_form: Option<Option<Expr>>,
    pub linear_case: Option<LinearCase>,
}

// ---------------------------------------------------------------------------
// Generic-point linear algebra on generators

fn generic_point<I: IntoIterator<Item = String>>(params: I) -> BTreeMap<String, Rational> {
    params
        .into_iter()
        .enumerate()
        .map(|(i, p)| (p, crate::expr::rat(17 + 6 * i as i64, 7 + 2 * i as i64)))
        .collect()
}

fn bindings(sigma: &BTreeMap<String, Expr>) -> Bindings {
    sigma
        .iter()
        .map(|(p, v)| (Symbol::Param(p.clone()), Binding::Value(v.clone())))
        .collect()
}

fn cond_bindings(cond: &Conditions) -> Bindings {
    bindings(&cond.equalities.iter().map(|(k, v)| (k.clone(), v.to_expr())).collect())
}

/// Coefficient columns of expressions over their atoms, evaluated at a
/// generic parameter point; one column per input vector.
fn generic_matrix(vectors: &[Vec<Expr>]) -> Matrix {
    let mut params = BTreeSet::new();
    let collected: Vec<Vec<BTreeMap<Expr, ParamPoly>>> = vectors
        .iter()
        .map(|v| v.iter().map(|e| collect_atoms(&together(e))).collect())
        .collect();
    for v in &collected {
        for c in v {
            for p in c.values() {
                params.extend(p.params());
            }
        }
    }
    let point = generic_point(params);
    let mut keys: BTreeSet<(usize, Expr)> = BTreeSet::new();
    for v in &collected {
        for (i, c) in v.iter().enumerate() {
            keys.extend(c.keys().map(|a| (i, a.clone())));
        }
    }
    keys.iter()
        .map(|(i, a)| {
            collected
                .iter()
                .map(|v| {
                    v[*i]
                        .get(a)
                        .and_then(|p| p.eval(&point))
                        .unwrap_or_else(|| Rational::from_integer(0.into()))
                })
                .collect()
        })
        .collect()
}

fn generator_rank(gens: &[Generator]) -> usize {
    if gens.is_empty() {
        return 0;
    }
    let vs: Vec<Vec<Expr>> = gens
        .iter()
        .map(|g| vec![g.xi.clone(), g.eta.clone(), g.phi.clone()])
        .collect();
    linalg::rank(&generic_matrix(&vs))
}

/// True if the two lists span the same space (at a generic parameter
/// point when parameters remain).
pub fn same_generator_span(a: &[Generator], b: &[Generator]) -> bool {
    let ra = generator_rank(a);
    let rb = generator_rank(b);
    let both: Vec<Generator> = a.iter().chain(b).cloned().collect();
    ra == rb && generator_rank(&both) == ra
}

/// Splits a solution basis into kernel generators and representatives of
/// the rest.
fn split_kernel(
    spec: &PdeSpec,
    gens: &[Generator],
    cond: &Conditions,
    cap: usize,
) -> Result<(Vec<Generator>, Vec<Generator>), ClassifyError> {
    let b = cond_bindings(cond);
    let ps: Vec<Vec<Expr>> = gens
        .iter()
        .map(|g| p_coefficients(spec, g).into_iter().map(|e| e.subst(&b)).collect())
        .collect();
    let mut kernel = Vec::new();
    let mut rest = Vec::new();
    let mut rest_p = Vec::new();
    for (g, p) in gens.iter().zip(&ps) {
        if p.iter().all(|e| is_zero(e).is_identically_zero()) {
            kernel.push(g.clone());
        } else {
            rest.push(g.clone());
            rest_p.push(p.clone());
        }
    }
    let m = generic_matrix(&rest_p);
    let rank = linalg::rank(&m);
    if rank == rest.len() {
        return Ok((kernel, rest));
    }
    // Some combination of the remaining generators lies in the kernel.
    let symbolic = symbolic_columns(&rest_p);
    let ns = linalg::param_null_space(&symbolic, rest.len(), cond, cap)?;
    let pick = ns
        .iter()
        .find(|n| n.conditions.equalities == cond.equalities)
        .or(ns.first());
    if let Some(n) = pick {
        for v in &n.basis {
            let g = v
                .iter()
                .zip(&rest)
                .filter(|(c, _)| !c.is_zero())
                .fold(Generator::zero(), |acc, (c, g)| acc.add(&g.scale(&c.to_expr())));
            kernel.push(g);
        }
    }
    let mut chosen: Vec<usize> = Vec::new();
    for k in 0..rest.len() {
        let mut cols = chosen.clone();
        cols.push(k);
        let sub: Matrix = m.iter().map(|r| cols.iter().map(|&c| r[c].clone()).collect()).collect();
        if linalg::rank(&sub) == cols.len() {
            chosen = cols;
        }
    }
    Ok((kernel, chosen.into_iter().map(|k| rest[k].clone()).collect()))
}

fn symbolic_columns(vectors: &[Vec<Expr>]) -> Vec<Vec<ParamPoly>> {
    let collected: Vec<Vec<BTreeMap<Expr, ParamPoly>>> = vectors
        .iter()
        .map(|v| v.iter().map(|e| collect_atoms(&together(e))).collect())
        .collect();
    let mut keys: BTreeSet<(usize, Expr)> = BTreeSet::new();
    for v in &collected {
        for (i, c) in v.iter().enumerate() {
            keys.extend(c.keys().map(|a| (i, a.clone())));
        }
    }
    keys.iter()
        .map(|(i, a)| {
            collected
                .iter()
                .map(|v| v[*i].get(a).cloned().unwrap_or_default())
                .collect()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Pipeline

struct Candidate {
    group: usize,
    pattern: Option<Pattern>,
    conditions: Conditions,
    relations: Vec<Vec<ParamPoly>>,
    kernel: Vec<Generator>,
    generators: Vec<Generator>,
    notes: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    /// `lam F + u F' + lam u + lam = 0`.
    Power,
    /// `lam F + F' + lam u + lam = 0`.
    Exp,
}

#[derive(Clone, Debug)]
struct Pattern {
    kinds: Vec<Option<Kind>>,
    /// Relation vector for each F_l with a relation.
    rels: Vec<(usize, Vec<ParamPoly>)>,
    params: Vec<String>,
}

impl Pattern {
    fn label(&self) -> String {
        self.kinds
            .iter()
            .map(|k| match k {
                Some(Kind::Power) => "P",
                Some(Kind::Exp) => "E",
                None => "-",
            })
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Kernel of the symmetry groups inside the ansatz, one entry per
/// parameter case.
pub fn kernel_cases(spec: &PdeSpec, basis: &AnsatzBasis, cap: usize) -> Result<Vec<KernelCase>, ClassifyError> {
    Ok(
        solve_in_ansatz(&kernel_conditions(spec), basis, &Conditions::default(), cap)?
            .into_iter()
            .map(|sol| KernelCase {
                conditions: sol.conditions,
                generators: sol.generators,
            })
            .collect(),
    )
}

pub fn classify(spec: &PdeSpec, basis: &AnsatzBasis) -> Result<ClassificationReport, ClassifyError> {
    classify_with_cap(spec, basis, DEFAULT_BRANCH_CAP)
}

pub fn classify_with_cap(
    spec: &PdeSpec,
    basis: &AnsatzBasis,
    cap: usize,
) -> Result<ClassificationReport, ClassifyError> {
    let mut report = ClassificationReport {
        basis: basis.describe(),
        ..Default::default()
    };
    report.kernel_cases = kernel_cases(spec, basis, cap)?;
    report.kernel = report
        .kernel_cases
        .iter()
        .find(|k| k.conditions.equalities.is_empty())
        .or(report.kernel_cases.first())
        .map(|k| k.generators.clone())
        .unwrap_or_default();

    if is_laplace_shape(spec) {
        let e = laplace_potential_equation(&spec.alphas[0], &Expr::param("C"));
        report.notes.push(format!(
            "potential equation for xi = Phi_x, eta = -Phi_y: {} = 0",
            emit_expr(&e)
        ));
        report.potential_equation = Some(e);
    }
    if is_gss_shape(spec) {
        let r = gss_alpha_form(&spec.alphas[0]);
        report.alpha_form = Some(r.clone());
        if r.is_none() {
            report.notes.push(
                "alpha form condition fails: (x*alpha_x + y*alpha_y)/alpha is not constant, \
                 so no symmetry is allowed beyond the kernel"
                    .into(),
            );
            return Ok(report);
        }
    }

    if spec.fs.iter().all(|f| f.is_linear()) {
        report.linear_case = Some(linear_case(spec));
        report
            .notes
            .push("all F are linear in u: generator (c*u + Psi)*d/du with Psi left symbolic".into());
        return Ok(report);
    }

    let p = p_vector(spec);
    let free = f_free_equations(spec);
    let mut cands: Vec<Candidate> = Vec::new();
    let arbitrary = spec.fs.iter().filter(|f| f.is_arbitrary()).count();
    if arbitrary == spec.num_terms() {
        if spec.num_terms() > 2 {
            report
                .notes
                .push("relation patterns are enumerated only for L <= 2; kernel analysis only".into());
            return Ok(report);
        }
        for pat in patterns(spec.num_terms(), &mut report.equivalence_moves) {
            let rels: Vec<Vec<ParamPoly>> = pat.rels.iter().map(|(_, v)| v.clone()).collect();
            let mut eqs = free.clone();
            eqs.extend(orthogonality_constraints(&p, &rels));
            let start = pattern_start(&pat);
            for sol in solve_in_ansatz(&eqs, basis, &start, cap)? {
                let (kernel, generators) = split_kernel(spec, &sol.generators, &sol.conditions, cap)?;
                cands.push(Candidate {
                    group: 0,
                    pattern: Some(pat.clone()),
                    relations: rels
                        .iter()
                        .map(|v| v.iter().map(|e| sol.conditions.apply(e)).collect())
                        .collect(),
                    conditions: sol.conditions,
                    kernel,
                    generators,
                    notes: unresolved_notes(&sol.unresolved),
                });
            }
        }
        if spec.num_terms() == 2 {
            report.manual.push(mixed_case(&p));
        }
    } else if arbitrary > 0 {
        report
            .notes
            .push("mixed arbitrary and concrete F: kernel analysis only".into());
        return Ok(report);
    } else {
        let fam = FunctionFamily::from_exprs(&spec.f_exprs());
        if fam.has_linear_member() {
            report
                .notes
                .push("some F is linear in u; its linear part is treated like any other member".into());
        }
        for rb in relation_branches(&fam, &Conditions::default())? {
            if let Some(why) = &rb.excluded {
                report
                    .notes
                    .push(format!("case {} excluded: {why}", rb.conditions.describe().join(", ")));
                continue;
            }
            if rb.basis.is_empty() {
                continue;
            }
            if rb.basis.confidence == Confidence::NumericSampled {
                report
                    .notes
                    .push("relations found by sampling, not symbolically".into());
            }
            let mut eqs = free.clone();
            eqs.extend(orthogonality_constraints(&p, &rb.basis.relations));
            for sol in solve_in_ansatz(&eqs, basis, &rb.conditions, cap)? {
                let (kernel, generators) = split_kernel(spec, &sol.generators, &sol.conditions, cap)?;
                cands.push(Candidate {
                    group: 0,
                    pattern: None,
                    relations: rb
                        .basis
                        .relations
                        .iter()
                        .map(|v| v.iter().map(|e| sol.conditions.apply(e)).collect())
                        .collect(),
                    conditions: sol.conditions,
                    kernel,
                    generators,
                    notes: unresolved_notes(&sol.unresolved),
                });
            }
        }
    }
    merge_special_cases(&mut cands);
    for c in cands {
        let b = finish_branch(spec, c, &mut report.equivalence_moves);
        if b.generators.is_empty() {
            report.kernel_only.push(b);
        } else {
            report.branches.push(b);
        }
    }
    mark_special_values(&mut report.branches);
    Ok(report)
}

/// Notes a fixed-parameter branch that is a point of a q-family with
/// extra generators.
fn mark_special_values(branches: &mut [ClassificationBranch]) {
    let mut marks = Vec::new();
    for (i, s) in branches.iter().enumerate() {
        if !s.substitutions.is_empty() {
            continue;
        }
        let q = s.generators.iter().find_map(|g| {
            let scaling = g.xi == Expr::x() && g.eta == Expr::y() && g.a().is_zero_node();
            g.b().as_const().filter(|_| scaling).map(|b| Expr::constant(-b))
        });
        let Some(q) = q else { continue };
        for (j, f) in branches.iter().enumerate() {
            if f.substitutions.is_empty() || f.pattern != s.pattern {
                continue;
            }
            let hit = f.substitutions.iter().all(|(k, v)| {
                let fixed = s
                    .conditions
                    .equalities
                    .get(k)
                    .map(|p| p.to_expr())
                    .unwrap_or_else(Expr::zero);
                v.subst_param("q", &q) == fixed
            });
            if hit {
                marks.push((i, j, q.clone()));
            }
        }
    }
    for (i, j, q) in marks {
        let extra = branches[i]
            .generators
            .len()
            .saturating_sub(branches[j].generators.len());
        branches[i].notes.push(format!(
            "q = {} of the q-family: {extra} additional generator(s)",
            emit_expr(&q)
        ));
        branches[j].notes.push(format!(
            "at q = {} the symmetry algebra is larger; see that case",
            emit_expr(&q)
        ));
    }
}

fn unresolved_notes(u: &[ParamPoly]) -> Vec<String> {
    u.iter()
        .map(|p| format!("assumed {} != 0 without solving it", emit_expr(&p.to_expr())))
        .collect()
}

fn same_group(a: &Candidate, b: &Candidate) -> bool {
    a.group == b.group
        && match (&a.pattern, &b.pattern) {
            (None, None) => true,
            (Some(x), Some(y)) => x.label() == y.label(),
            _ => false,
        }
}

/// Folds a special parameter case into the case it specialises when the
/// generic generators, evaluated on the special values, give the same
/// symmetries.
fn merge_special_cases(cands: &mut Vec<Candidate>) {
    loop {
        let mut merged = None;
        let mut order: Vec<usize> = (0..cands.len()).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(cands[i].conditions.equalities.len()));
        'outer: for &s in &order {
            let mut parents: Vec<usize> = (0..cands.len())
                .filter(|&g| g != s && same_group(&cands[g], &cands[s]))
                .collect();
            parents.sort_by_key(|&g| std::cmp::Reverse(cands[g].conditions.equalities.len()));
            for g in parents {
                if let Some(removed) = specialises(&cands[s], &cands[g]) {
                    merged = Some((s, g, removed));
                    break 'outer;
                }
            }
        }
        let Some((s, g, removed)) = merged else {
            return;
        };
        cands[g].conditions.inequations.retain(|q| !removed.contains(q));
        cands.remove(s);
    }
}

// Inequations of `g` dropped if `s` merges into it.
fn specialises(s: &Candidate, g: &Candidate) -> Option<Vec<ParamPoly>> {
    let (se, ge) = (&s.conditions.equalities, &g.conditions.equalities);
    if se.len() <= ge.len() || !ge.iter().all(|(k, v)| se.get(k) == Some(v)) {
        return None;
    }
    let sigma: BTreeMap<String, ParamPoly> = se
        .iter()
        .filter(|(k, _)| !ge.contains_key(*k))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    let removed: Vec<ParamPoly> = g
        .conditions
        .inequations
        .iter()
        .filter(|q| q.subst_all(&sigma).is_zero())
        .cloned()
        .collect();
    if removed.is_empty() {
        return None;
    }
    let b = bindings(&sigma.iter().map(|(k, v)| (k.clone(), v.to_expr())).collect());
    let gs: Vec<Generator> = g.generators.iter().map(|x| x.map(|e| e.subst(&b))).collect();
    let with_s: Vec<Generator> = s.kernel.iter().chain(&s.generators).cloned().collect();
    let with_g: Vec<Generator> = s.kernel.iter().chain(&gs).cloned().collect();
    same_generator_span(&with_s, &with_g).then_some(removed)
}

fn finish_branch(spec: &PdeSpec, c: Candidate, moves: &mut Vec<String>) -> ClassificationBranch {
    let mut b = ClassificationBranch {
        pattern: c.pattern.as_ref().map(|p| p.label()),
        constraints: c.conditions.describe(),
        relations: describe_relations(spec, &c.relations),
        conditions: c.conditions,
        substitutions: BTreeMap::new(),
        solved_fs: Vec::new(),
        generators: c.generators,
        kernel: c.kernel,
        verified: Vec::new(),
        notes: c.notes,
    };
    match &c.pattern {
        None => {
            let cb = cond_bindings(&b.conditions);
            b.solved_fs = spec.f_exprs().iter().map(|f| f.subst(&cb)).collect();
        }
        Some(pat) => {
            let values = pattern_values(pat, &b.conditions);
            let values = if b.generators.len() == 1 {
                match reparametrise(pat, &b.generators[0], &b.conditions) {
                    Some(r) => {
                        moves.push(format!(
                            "generator rescaled to xi = x, eta = y; B = -c*q defines q (lambda {} solved)",
                            r.lambda
                        ));
                        b.generators = vec![r.generator];
                        b.constraints = r.constraints;
                        b.substitutions = r.values.clone();
                        b.relations = substituted_relations(spec, &c.relations, &r.values);
                        r.values
                    }
                    None => values,
                }
            } else {
                values
            };
            b.solved_fs = solved_forms(pat, &values);
        }
    }
    let s = b.specialised_spec(spec);
    let cond = if b.substitutions.is_empty() {
        b.conditions.clone()
    } else {
        Conditions::default()
    };
    b.verified = b
        .generators
        .iter()
        .map(|g| verify::symbolic_residual(&s, g, &cond).ok())
        .collect();
    if b.verified.iter().any(|v| !matches!(v, Some(TriState::IdenticallyZero))) {
        b.notes
            .push("some generators are not confirmed by the symbolic residual check".into());
    }
    if b.generators.len() > 3 {
        b.notes.push(format!(
            "family over the ansatz basis: {} generators",
            b.generators.len()
        ));
    }
    b
}

fn substituted_relations(spec: &PdeSpec, rels: &[Vec<ParamPoly>], values: &BTreeMap<String, Expr>) -> Vec<String> {
    let fam = FunctionFamily::from_exprs(&arbitrary_version(spec).f_exprs());
    let rows: Vec<Vec<Expr>> = rels
        .iter()
        .map(|v| {
            v.iter()
                .map(|c| values.iter().fold(c.to_expr(), |e, (p, val)| e.subst_param(p, val)))
                .collect()
        })
        .collect();
    family::describe_rows(&rows, &fam.labels())
}

fn describe_relations(spec: &PdeSpec, rels: &[Vec<ParamPoly>]) -> Vec<String> {
    let fam = FunctionFamily::from_exprs(&arbitrary_version(spec).f_exprs());
    RelationBasis {
        d: fam.dim(),
        relations: rels.to_vec(),
        confidence: Confidence::Symbolic,
    }
    .describe(&fam)
}

// ---------------------------------------------------------------------------
// Relation patterns for arbitrary F

fn slot_names(l: usize, ell: usize) -> [String; 5] {
    let d_u = 3 * l + 1;
    let d_1 = 3 * l + 2;
    let tail = if ell == 1 { "lam" } else { "mu" };
    [
        format!("lam{ell}"),
        format!("lam{}", l + ell),
        format!("lam{}", 2 * l + ell),
        format!("{tail}{d_u}"),
        format!("{tail}{d_1}"),
    ]
}

fn patterns(l: usize, moves: &mut Vec<String>) -> Vec<Pattern> {
    let options = [Some(Kind::Power), Some(Kind::Exp), None];
    let mut combos: Vec<Vec<Option<Kind>>> = vec![Vec::new()];
    for _ in 0..l {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                options.iter().map(move |o| {
                    let mut c = c.clone();
                    c.push(*o);
                    c
                })
            })
            .collect();
    }
    combos.retain(|c| c.iter().any(|k| k.is_some()));
    combos.sort_by_key(|c| std::cmp::Reverse(c.iter().filter(|k| k.is_some()).count()));
    let d = 3 * l + 2;
    let mut recorded = BTreeSet::new();
    let mut out = Vec::new();
    for kinds in combos {
        let first_p = kinds.iter().position(|k| *k == Some(Kind::Power));
        let last_e = kinds.iter().rposition(|k| *k == Some(Kind::Exp));
        let mut rels = Vec::new();
        let mut params = Vec::new();
        for (i, k) in kinds.iter().enumerate() {
            let Some(k) = k else { continue };
            let ell = i + 1;
            let names = slot_names(l, ell);
            let idx = [i, l + i, 2 * l + i, 3 * l, 3 * l + 1];
            let mut v = vec![ParamPoly::zero(); d];
            let mut set_param = |slot: usize, v: &mut Vec<ParamPoly>| {
                v[idx[slot]] = ParamPoly::param(&names[slot]);
                params.push(names[slot].clone());
            };
            match k {
                Kind::Power => {
                    v[idx[2]] = ParamPoly::one();
                    set_param(0, &mut v);
                    if first_p == Some(i) {
                        let m = format!("translation of u sets {} = 0 in relation {ell}", names[1]);
                        if recorded.insert(m.clone()) {
                            moves.push(m);
                        }
                    } else {
                        set_param(1, &mut v);
                    }
                }
                Kind::Exp => {
                    v[idx[1]] = ParamPoly::one();
                    if last_e == Some(i) {
                        v[idx[0]] = ParamPoly::one();
                        let m = format!("scaling of u sets {} = 1 in relation {ell}", names[0]);
                        if recorded.insert(m.clone()) {
                            moves.push(m);
                        }
                    } else {
                        set_param(0, &mut v);
                    }
                }
            }
            set_param(3, &mut v);
            set_param(4, &mut v);
            rels.push((i, v));
        }
        out.push(Pattern { kinds, rels, params });
    }
    out
}

fn pattern_start(pat: &Pattern) -> Conditions {
    let mut c = Conditions::default();
    for ((i, _), k) in pat.rels.iter().zip(pat.kinds.iter().flatten()) {
        if *k == Kind::Power {
            // lam_F = 0 or -1 leaves only linear or logarithmic F.
            let lam = ParamPoly::param(&format!("lam{}", i + 1));
            c.assume_nonzero(&lam);
            c.assume_nonzero(&lam.add(&ParamPoly::one()));
        }
    }
    c
}

fn pattern_values(pat: &Pattern, cond: &Conditions) -> BTreeMap<String, Expr> {
    pat.params
        .iter()
        .map(|p| (p.clone(), cond.apply(&ParamPoly::param(p)).to_expr()))
        .collect()
}

/// F forms solving each relation, with the parameter values given.
fn solved_forms(pat: &Pattern, values: &BTreeMap<String, Expr>) -> Vec<Expr> {
    let l = pat.kinds.len();
    let u = Expr::u();
    (0..l)
        .map(|i| {
            let Some(k) = pat.kinds[i] else {
                return Expr::func(&format!("F{}", i + 1), vec![u.clone()]);
            };
            let v = &pat.rels.iter().find(|(j, _)| *j == i).unwrap().1;
            let names = slot_names(l, i + 1);
            let val = |slot: usize, fixed: &ParamPoly| -> Expr {
                if fixed.is_constant() {
                    fixed.to_expr()
                } else {
                    values.get(&names[slot]).cloned().unwrap_or_else(|| fixed.to_expr())
                }
            };
            let idx = [i, l + i, 2 * l + i, 3 * l, 3 * l + 1];
            let lf = val(0, &v[idx[0]]);
            let lu = val(3, &v[idx[3]]);
            let l1 = val(4, &v[idx[4]]);
            match k {
                Kind::Power => Expr::add_all([
                    u.pow(&lf.neg()),
                    (&lu * &(&lf + &Expr::one()).recip() * u.clone()).neg(),
                    (&l1 * &lf.recip()).neg(),
                ]),
                Kind::Exp => {
                    if lf.is_zero_node() {
                        return Expr::add_all([(&lu * &u.powi(2)).scale(&crate::expr::rat(-1, 2)), (&l1 * &u).neg()]);
                    }
                    let a = (&lu * &lf.recip()).neg();
                    let b = (&l1.neg() - &a) * lf.recip();
                    Expr::add_all([Expr::exp((&lf * &u).neg()), &a * &u, b])
                }
            }
        })
        .collect()
}

struct Reparam {
    lambda: String,
    generator: Generator,
    values: BTreeMap<String, Expr>,
    constraints: Vec<String>,
}

/// For a single dilation-type generator `c (x d/dx + y d/dy) + B u d/du`
/// with one free relation parameter, trades that parameter for
/// `q = -B / c` and rescales the generator by `1/c`.
fn reparametrise(pat: &Pattern, g: &Generator, cond: &Conditions) -> Option<Reparam> {
    let c = g.xi.diff(Var::X);
    let b = g.b();
    let xy = [Var::X, Var::Y];
    if c.depends_on_any(&xy)
        || b.depends_on_any(&xy)
        || !g.a().is_zero_node()
        || !(&g.xi - &(&c * &Expr::x())).is_zero_node()
        || !(&g.eta - &(&c * &Expr::y())).is_zero_node()
    {
        return None;
    }
    let pc = ParamPoly::from_expr(&c)?;
    let pb = ParamPoly::from_expr(&b)?;
    let free: Vec<&String> = pat
        .params
        .iter()
        .filter(|p| !cond.equalities.contains_key(*p))
        .collect();
    let in_g: Vec<&String> = free
        .iter()
        .copied()
        .filter(|p| pc.params().contains(p) || pb.params().contains(p))
        .collect();
    if in_g.len() != 1 || pc.is_constant() && pb.is_constant() {
        return None;
    }
    let lam = in_g[0].clone();
    // q c + B = 0 is linear in lam: e1 lam + e0 = 0.
    let e = ParamPoly::param("q").mul(&pc).add(&pb);
    if e.degree_in(&lam) != 1 {
        return None;
    }
    let cs = e.coeffs_in(&lam);
    let lam_value = quotient_expr(&cs[0].neg(), &cs[1]);
    let mut values = pattern_values(pat, cond);
    for v in values.values_mut() {
        *v = v.subst_param(&lam, &lam_value);
    }
    values.insert(lam.clone(), lam_value.clone());
    // After dividing by c the generator is x d/dx + y d/dy - q u d/du.
    let generator = Generator::reduced(Expr::x(), Expr::y(), Expr::zero(), Expr::param("q").neg());
    let mut constraints = vec!["q != 0".to_string()];
    for q in &cond.inequations {
        let e = together(&q.to_expr().subst_param(&lam, &lam_value));
        let Some(pq) = ParamPoly::from_expr(&e) else {
            continue;
        };
        if pq.is_constant() {
            continue;
        }
        let s = format!("{} != 0", emit_expr(&pq.primitive().strip_monomial().to_expr()));
        if !constraints.contains(&s) && !pq.strip_monomial().is_constant() {
            constraints.push(s);
        }
    }
    Some(Reparam {
        lambda: lam,
        generator,
        values,
        constraints,
    })
}

/// `num / den` with the factors they share cancelled.
fn quotient_expr(num: &ParamPoly, den: &ParamPoly) -> Expr {
    if let Some(q) = num.try_div(den) {
        return q.to_expr();
    }
    let (mut num, mut den) = (num.clone(), den.clone());
    let mut candidates = vec![den.primitive()];
    if let Some((p, roots)) = den.univariate_rational_roots() {
        candidates.extend(
            roots
                .into_iter()
                .map(|r| ParamPoly::param(&p).sub(&ParamPoly::constant(r))),
        );
    }
    candidates.extend(den.common_monomial().0.iter().map(|(p, _)| ParamPoly::param(p)));
    for f in candidates.into_iter().filter(|f| !f.is_constant()) {
        while let (Some(a), Some(b)) = (num.try_div(&f), den.try_div(&f)) {
            num = a;
            den = b;
        }
    }
    match den.as_constant() {
        Some(c) => num.scale(&c.recip()).to_expr(),
        None => num.to_expr() * den.to_expr().recip(),
    }
}

fn mixed_case(p: &[Expr]) -> ManualCase {
    let d = p.len();
    let v: Vec<ParamPoly> = (1..=d).map(|i| ParamPoly::param(&format!("c{i}"))).collect();
    ManualCase {
        pattern: "mixed".into(),
        note: "a single relation coupling F1 and F2 requires manual analysis; \
               constraints are the rank-one conditions c_j p_i - c_i p_j = 0"
            .into(),
        constraints: orthogonality_constraints(p, &[v]),
    }
}

pub fn linear_case(spec: &PdeSpec) -> LinearCase {
    let fs = spec.f_exprs();
    let alpha_tilde = Expr::add_all(spec.alphas.iter().zip(&fs).map(|(a, f)| a * &f.diff(Var::U)));
    let beta_tilde = Expr::add_all(
        spec.alphas
            .iter()
            .zip(&fs)
            .map(|(a, f)| a * &f.subst_var(Var::U, &Expr::zero())),
    );
    let psi = Expr::func("Psi", vec![Expr::x(), Expr::y()]);
    let c = Expr::param("c");
    let side_condition = Expr::add_all([spec.operator(&psi), (&alpha_tilde * &psi).neg(), &c * &beta_tilde]);
    LinearCase {
        generator: Generator::new(Expr::zero(), Expr::zero(), &c * &Expr::u() + psi),
        alpha_tilde,
        beta_tilde,
        side_condition,
    }
}

#[cfg(test)]
mod tests;
