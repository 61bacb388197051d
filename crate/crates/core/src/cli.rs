//! Command-line front end. Each command builds a `ReportDocument`, rendered
//! either as plain text or as JSON.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::classify::{
    self, function_family, relation_branches, AnsatzBasis, ClassificationBranch, ClassifyError, KernelCase,
};
use crate::expr::{Rational, TriState};
use crate::linalg::{Conditions, DEFAULT_BRANCH_CAP};
use crate::parser::{emit_expr, parse_expr, parse_generator_file, parse_spec, FunctionSpec, ParseContext, PdeSpec};
use crate::prolong::{self, Generator};
use crate::verify::{self, NumericOptions, VerifyError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_UNSUPPORTED_F: i32 = 3;
pub const EXIT_BRANCH_CAP: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "liesym",
    version,
    about = "Lie point symmetries of quasi-linear second-order PDEs"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
}

#[derive(clap::Args, Debug, Clone)]
pub struct AnsatzArgs {
    /// Total degree of the polynomial ansatz (default from the spec, else 4).
    #[arg(long)]
    pub degree: Option<u32>,
    /// Extra atom `s,t` adding exp(s*x)cos(t*y), exp(s*x)sin(t*y) and the
    /// swapped pair; repeatable.
    #[arg(long = "atoms", value_name = "S,T", allow_hyphen_values = true)]
    pub atoms: Vec<String>,
    /// Cap on parameter case splits.
    #[arg(long, default_value_t = DEFAULT_BRANCH_CAP)]
    pub branch_cap: usize,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Family f, its linear relations and the rank k.
    Relations { spec: PathBuf },
    /// Determining system, p-vector and structural checks.
    Prolong { spec: PathBuf },
    /// Kernel of the symmetry groups.
    Kernel {
        spec: PathBuf,
        #[command(flatten)]
        ansatz: AnsatzArgs,
    },
    /// Full classification with parameter branches.
    Classify {
        spec: PathBuf,
        #[command(flatten)]
        ansatz: AnsatzArgs,
    },
    /// Checks one generator against a spec.
    Verify {
        spec: PathBuf,
        #[arg(long)]
        generator: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Tolerance, e.g. 1e-25.
        #[arg(long, default_value = "1e-25")]
        tol: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Working precision in bits (default from LIESYM_PRECISION_BITS, else 128).
        #[arg(long)]
        precision: Option<usize>,
    },
}

// ---------------------------------------------------------------------------
// Report document

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct ReportDocument {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub spec: String,
    pub payload: Payload,
    pub exit_status: i32,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Relations(RelationsPayload),
    Prolong(ProlongPayload),
    Kernel(KernelPayload),
    Classify(ClassifyPayload),
    Verify(VerifyPayload),
    Error { message: String },
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct Labeled {
    pub label: String,
    pub expr: String,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct RelationCase {
    pub constraints: Vec<String>,
    pub relations: Vec<Vec<String>>,
    pub equations: Vec<String>,
    pub k: usize,
    pub confidence: String,
    pub excluded: Option<String>,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct LinearNotice {
    pub generator: GeneratorPayload,
    pub alpha_tilde: String,
    pub beta_tilde: String,
    pub side_condition: String,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct RelationsPayload {
    pub d: usize,
    pub family: Vec<Labeled>,
    pub cases: Vec<RelationCase>,
    pub linear_case: Option<LinearNotice>,
    pub notes: Vec<String>,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct ProlongPayload {
    pub equations: Vec<Labeled>,
    pub f_dependent: Option<String>,
    pub p_vector: Vec<Labeled>,
    pub family: Vec<String>,
    pub cross_check: bool,
    pub forces_xi_eta_u: bool,
    pub forces_phi_uu: bool,
    pub f_dependent_count: usize,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct GeneratorPayload {
    pub xi: String,
    pub eta: String,
    pub phi: String,
    #[serde(rename = "A")]
    pub a: String,
    #[serde(rename = "B")]
    pub b: String,
    pub verified: Option<String>,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct KernelCasePayload {
    pub constraints: Vec<String>,
    pub generators: Vec<GeneratorPayload>,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct KernelPayload {
    pub basis: String,
    pub cases: Vec<KernelCasePayload>,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct BranchPayload {
    pub pattern: Option<String>,
    pub constraints: Vec<String>,
    pub substitutions: Vec<Labeled>,
    pub relations: Vec<String>,
    pub solved_fs: Vec<String>,
    pub generators: Vec<GeneratorPayload>,
    pub notes: Vec<String>,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct ManualPayload {
    pub pattern: String,
    pub note: String,
    pub constraints: Vec<String>,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct ClassifyPayload {
    pub basis: String,
    pub kernel: Vec<GeneratorPayload>,
    pub kernel_cases: Vec<KernelCasePayload>,
    pub branches: Vec<BranchPayload>,
    pub kernel_only: Vec<BranchPayload>,
    pub manual: Vec<ManualPayload>,
    pub linear_case: Option<LinearNotice>,
    pub equivalence_moves: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct VerifyPayload {
    pub generator: GeneratorPayload,
    pub symbolic: Option<String>,
    pub numeric_max: String,
    pub samples_used: usize,
    pub tol: String,
    pub precision_bits: usize,
    pub seed: u64,
    pub constraints_assumed: Vec<String>,
    pub passed: bool,
}

// ---------------------------------------------------------------------------
// Commands

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(m: impl ToString) -> Failure {
        Failure {
            code: EXIT_INPUT,
            message: m.to_string(),
        }
    }
}

impl From<ClassifyError> for Failure {
    fn from(e: ClassifyError) -> Failure {
        let code = if e.is_branch_explosion() {
            EXIT_BRANCH_CAP
        } else if matches!(e, ClassifyError::UnexpandableF) {
            EXIT_UNSUPPORTED_F
        } else {
            EXIT_INPUT
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn tristate(t: &TriState) -> String {
    match t {
        TriState::IdenticallyZero => "IdenticallyZero".into(),
        TriState::Nonzero => "Nonzero".into(),
        TriState::UnknownUnderConditions(cs) => format!(
            "UnknownUnderConditions({})",
            cs.iter().map(emit_expr).collect::<Vec<_>>().join(", ")
        ),
    }
}

fn generator_payload(g: &Generator, verified: Option<String>) -> GeneratorPayload {
    GeneratorPayload {
        xi: emit_expr(&g.xi),
        eta: emit_expr(&g.eta),
        phi: emit_expr(&g.phi),
        a: emit_expr(&g.a()),
        b: emit_expr(&g.b()),
        verified,
    }
}

// Kernel generators do not depend on F; they are checked with F = u^3.
fn kernel_probe(spec: &PdeSpec) -> PdeSpec {
    let cube = parse_expr("u^3").expect("literal");
    spec.with_functions(vec![FunctionSpec::Concrete(cube); spec.num_terms()])
}

fn kernel_case_payload(spec: &PdeSpec, k: &KernelCase) -> KernelCasePayload {
    let probe = kernel_probe(spec);
    KernelCasePayload {
        constraints: k.conditions.describe(),
        generators: k
            .generators
            .iter()
            .map(|g| {
                let v = verify::symbolic_residual(&probe, g, &k.conditions).ok();
                generator_payload(g, v.as_ref().map(tristate))
            })
            .collect(),
    }
}

fn branch_payload(spec: &PdeSpec, b: &ClassificationBranch) -> BranchPayload {
    // Re-verify against the specialised spec rather than trusting the stamp.
    let s = b.specialised_spec(spec);
    let cond = if b.substitutions.is_empty() {
        b.conditions.clone()
    } else {
        Conditions::default()
    };
    BranchPayload {
        pattern: b.pattern.clone(),
        constraints: b.constraints.clone(),
        substitutions: b
            .substitutions
            .iter()
            .map(|(k, v)| Labeled {
                label: k.clone(),
                expr: emit_expr(v),
            })
            .collect(),
        relations: b.relations.clone(),
        solved_fs: b.solved_fs.iter().map(emit_expr).collect(),
        generators: b
            .generators
            .iter()
            .map(|g| {
                let v = verify::symbolic_residual(&s, g, &cond).ok();
                generator_payload(g, v.as_ref().map(tristate))
            })
            .collect(),
        notes: b.notes.clone(),
    }
}

fn linear_notice(spec: &PdeSpec) -> LinearNotice {
    let lc = classify::linear_case(spec);
    LinearNotice {
        generator: generator_payload(&lc.generator, None),
        alpha_tilde: emit_expr(&lc.alpha_tilde),
        beta_tilde: emit_expr(&lc.beta_tilde),
        side_condition: emit_expr(&lc.side_condition),
    }
}

fn basis_for(spec: &PdeSpec, a: &AnsatzArgs) -> Result<AnsatzBasis, Failure> {
    let mut b = AnsatzBasis::for_spec(spec);
    if let Some(n) = a.degree {
        if n == 0 {
            return Err(Failure::input("--degree must be at least 1"));
        }
        b = b.with_degree(n);
    }
    let atoms = a.atoms.iter().map(|s| parse_atom(s)).collect::<Result<Vec<_>, _>>()?;
    Ok(b.with_atoms(&atoms))
}

fn parse_atom(s: &str) -> Result<(Rational, Rational), Failure> {
    let bad = || Failure::input(format!("atom `{s}` is not of the form s,t"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let num = |t: &str| {
        parse_expr(t.trim())
            .ok()
            .and_then(|e| e.as_const().cloned())
            .ok_or_else(bad)
    };
    Ok((num(a)?, num(b)?))
}

/// Decimal or scientific notation as an exact rational.
pub fn parse_decimal(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() || !(int.chars().chain(frac.chars())).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: num_bigint::BigInt = format!("{int}{frac}").parse().ok()?;
    let ten = num_bigint::BigInt::from(10);
    let shift = exp - frac.len() as i32;
    let mut q = Rational::from_integer(digits);
    let scale = Rational::from_integer(num_traits::pow(ten, shift.unsigned_abs() as usize));
    q = if shift >= 0 { q * scale } else { q / scale };
    Some(if neg { -q } else { q })
}

fn relations_payload(spec: &PdeSpec) -> Result<(RelationsPayload, i32), Failure> {
    let labels_of = |fam: &classify::FunctionFamily| -> Vec<Labeled> {
        fam.labels()
            .into_iter()
            .zip(&fam.f)
            .map(|(label, e)| Labeled {
                label,
                expr: emit_expr(e),
            })
            .collect()
    };
    match function_family(&spec.fs) {
        Err(ClassifyError::LinearF(i)) => {
            let fam = classify::FunctionFamily::from_exprs(&spec.f_exprs());
            Ok((
                RelationsPayload {
                    d: fam.dim(),
                    family: labels_of(&fam),
                    cases: Vec::new(),
                    linear_case: Some(linear_notice(spec)),
                    notes: vec![format!("F{i} is linear in u: linear case, no relation analysis")],
                },
                EXIT_OK,
            ))
        }
        Err(e) => Err(e.into()),
        Ok(fam) => {
            let branches = relation_branches(&fam, &Conditions::default())?;
            let mut notes = Vec::new();
            if spec.fs.iter().any(|f| f.is_arbitrary()) {
                notes.push("arbitrary F: no identical relations; kernel-only analysis applies".into());
            }
            let cases = branches
                .iter()
                .map(|b| RelationCase {
                    constraints: b.conditions.describe(),
                    relations: b
                        .basis
                        .relations
                        .iter()
                        .map(|v| v.iter().map(|c| emit_expr(&c.to_expr())).collect())
                        .collect(),
                    equations: b.basis.describe(&fam),
                    k: b.basis.rank(),
                    confidence: format!("{:?}", b.basis.confidence),
                    excluded: b.excluded.clone(),
                })
                .collect();
            Ok((
                RelationsPayload {
                    d: fam.dim(),
                    family: labels_of(&fam),
                    cases,
                    linear_case: None,
                    notes,
                },
                EXIT_OK,
            ))
        }
    }
}

fn prolong_payload(spec: &PdeSpec) -> ProlongPayload {
    let g = Generator::symbolic_reduced();
    let sys = prolong::reduced_system(spec, &g);
    let structure = prolong::determining_structure(spec);
    let p = prolong::p_coefficients(spec, &g);
    ProlongPayload {
        equations: sys
            .equations
            .iter()
            .map(|e| Labeled {
                label: e.label.clone(),
                expr: emit_expr(&e.expr),
            })
            .collect(),
        f_dependent: sys.f_dependent.map(|i| sys.equations[i].label.clone()),
        p_vector: p
            .iter()
            .enumerate()
            .map(|(i, e)| Labeled {
                label: format!("p{}", i + 1),
                expr: emit_expr(e),
            })
            .collect(),
        family: prolong::family_exprs(spec).iter().map(emit_expr).collect(),
        cross_check: prolong::cross_check(spec, &g),
        forces_xi_eta_u: structure.forces_xi_eta_u,
        forces_phi_uu: structure.forces_phi_uu,
        f_dependent_count: structure.f_dependent_count,
    }
}

fn classify_payload(spec: &PdeSpec, a: &AnsatzArgs) -> Result<ClassifyPayload, Failure> {
    let basis = basis_for(spec, a)?;
    let r = classify::classify_with_cap(spec, &basis, a.branch_cap)?;
    let probe = kernel_probe(spec);
    Ok(ClassifyPayload {
        basis: r.basis.clone(),
        kernel: r
            .kernel
            .iter()
            .map(|g| {
                let v = verify::symbolic_residual(&probe, g, &Conditions::default()).ok();
                generator_payload(g, v.as_ref().map(tristate))
            })
            .collect(),
        kernel_cases: r.kernel_cases.iter().map(|k| kernel_case_payload(spec, k)).collect(),
        branches: r.branches.iter().map(|b| branch_payload(spec, b)).collect(),
        kernel_only: r.kernel_only.iter().map(|b| branch_payload(spec, b)).collect(),
        manual: r
            .manual
            .iter()
            .map(|m| ManualPayload {
                pattern: m.pattern.clone(),
                note: m.note.clone(),
                constraints: m.constraints.iter().map(emit_expr).collect(),
            })
            .collect(),
        linear_case: r.linear_case.as_ref().map(|_| linear_notice(spec)),
        equivalence_moves: r.equivalence_moves.clone(),
        notes: r.notes.clone(),
    })
}

#[allow(clippy::too_many_arguments)]
fn verify_payload(
    spec: &PdeSpec,
    generator_text: &str,
    samples: usize,
    tol: &str,
    seed: u64,
    precision: Option<usize>,
) -> Result<(VerifyPayload, i32), Failure> {
    let ctx = ParseContext {
        params: spec.params.iter().cloned().collect(),
        functions: spec.functions.iter().cloned().collect(),
        permissive: false,
    };
    let g = parse_generator_file(generator_text, &ctx).map_err(Failure::input)?;
    let tol_q = parse_decimal(tol).ok_or_else(|| Failure::input(format!("bad tolerance `{tol}`")))?;
    let opts = NumericOptions {
        samples,
        tol: tol_q,
        seed,
        precision_bits: precision.unwrap_or_else(verify::default_precision),
    };
    let report = verify::check(spec, &g, &Conditions::default(), &opts).map_err(|e| match e {
        VerifyError::NotEvaluable(_) | VerifyError::SymbolicIndeterminate(_) => Failure {
            code: EXIT_UNSUPPORTED_F,
            message: e.to_string(),
        },
        VerifyError::Domain(_) => Failure {
            code: EXIT_VERIFY_FAILED,
            message: e.to_string(),
        },
    })?;
    let code = if report.passed { EXIT_OK } else { EXIT_VERIFY_FAILED };
    Ok((
        VerifyPayload {
            generator: generator_payload(&g, None),
            symbolic: report.symbolic.as_ref().map(tristate),
            numeric_max: format!("{:e}", report.numeric_max_f64()),
            samples_used: report.samples_used,
            tol: tol.to_string(),
            precision_bits: opts.precision_bits,
            seed,
            constraints_assumed: report.constraints_assumed.clone(),
            passed: report.passed,
        },
        code,
    ))
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Runs one command and returns its report document.
pub fn execute(command: &Command) -> ReportDocument {
    let (name, path) = match command {
        Command::Relations { spec } => ("relations", spec),
        Command::Prolong { spec } => ("prolong", spec),
        Command::Kernel { spec, .. } => ("kernel", spec),
        Command::Classify { spec, .. } => ("classify", spec),
        Command::Verify { spec, .. } => ("verify", spec),
    };
    let text = read(path);
    let result = text.as_ref().map_err(|f| Failure::input(&f.message)).and_then(|t| {
        let spec = parse_spec(t).map_err(Failure::input)?;
        match command {
            Command::Relations { .. } => relations_payload(&spec).map(|(p, c)| (Payload::Relations(p), c)),
            Command::Prolong { .. } => Ok((Payload::Prolong(prolong_payload(&spec)), EXIT_OK)),
            Command::Kernel { ansatz, .. } => {
                let basis = basis_for(&spec, ansatz)?;
                let cases = classify::kernel_cases(&spec, &basis, ansatz.branch_cap)?;
                Ok((
                    Payload::Kernel(KernelPayload {
                        basis: basis.describe(),
                        cases: cases.iter().map(|k| kernel_case_payload(&spec, k)).collect(),
                    }),
                    EXIT_OK,
                ))
            }
            Command::Classify { ansatz, .. } => Ok((Payload::Classify(classify_payload(&spec, ansatz)?), EXIT_OK)),
            Command::Verify {
                generator,
                samples,
                tol,
                seed,
                precision,
                ..
            } => {
                let gt = read(generator)?;
                verify_payload(&spec, &gt, *samples, tol, *seed, *precision).map(|(p, c)| (Payload::Verify(p), c))
            }
        }
    });
    let (payload, code) = match result {
        Ok(pc) => pc,
        Err(f) => (Payload::Error { message: f.message }, f.code),
    };
    ReportDocument {
        tool: "liesym".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: name.into(),
        spec: text.unwrap_or_default(),
        payload,
        exit_status: code,
    }
}

/// Parses arguments, runs the command and returns `(exit code, output)`.
pub fn run<I, T>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            return (code, e.render().to_string());
        }
    };
    let doc = execute(&cli.command);
    let out = match cli.format {
        Format::Json => serde_json::to_string_pretty(&doc).expect("serializable") + "\n",
        Format::Human => render_human(&doc),
    };
    (doc.exit_status, out)
}

// ---------------------------------------------------------------------------
// Human format

fn gen_line(g: &GeneratorPayload) -> String {
    let mut s = format!("xi = {}, eta = {}, phi = {}", g.xi, g.eta, g.phi);
    if let Some(v) = &g.verified {
        let _ = write!(s, "  [{v}]");
    }
    s
}

fn list(out: &mut String, indent: &str, head: &str, items: &[String]) {
    if items.is_empty() {
        return;
    }
    let _ = writeln!(out, "{indent}{head}:");
    for i in items {
        let _ = writeln!(out, "{indent}  {i}");
    }
}

fn render_branch(out: &mut String, i: usize, b: &BranchPayload) {
    let pat = b.pattern.as_deref().map(|p| format!(" [{p}]")).unwrap_or_default();
    let _ = writeln!(out, "  branch {}{pat}", i + 1);
    list(out, "    ", "constraints", &b.constraints);
    let subs: Vec<String> = b
        .substitutions
        .iter()
        .map(|l| format!("{} = {}", l.label, l.expr))
        .collect();
    list(out, "    ", "substitutions", &subs);
    list(out, "    ", "relations", &b.relations);
    let fs: Vec<String> = b
        .solved_fs
        .iter()
        .enumerate()
        .map(|(i, f)| format!("F{} = {f}", i + 1))
        .collect();
    list(out, "    ", "F", &fs);
    let gs: Vec<String> = b.generators.iter().map(gen_line).collect();
    list(out, "    ", "generators", &gs);
    list(out, "    ", "notes", &b.notes);
}

fn render_kernel_cases(out: &mut String, cases: &[KernelCasePayload]) {
    for k in cases {
        let c = if k.constraints.is_empty() {
            "all parameter values".to_string()
        } else {
            k.constraints.join(", ")
        };
        let _ = writeln!(out, "  case {c}:");
        for g in &k.generators {
            let _ = writeln!(out, "    {}", gen_line(g));
        }
    }
}

pub fn render_human(doc: &ReportDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {} {}", doc.tool, doc.version, doc.command);
    match &doc.payload {
        Payload::Error { message } => {
            let _ = writeln!(out, "error: {message}");
        }
        Payload::Relations(r) => {
            let _ = writeln!(out, "D = {}", r.d);
            for l in &r.family {
                let _ = writeln!(out, "  {} = {}", l.label, l.expr);
            }
            for c in &r.cases {
                let head = if c.constraints.is_empty() {
                    "relations".to_string()
                } else {
                    format!("relations when {}", c.constraints.join(", "))
                };
                if let Some(ex) = &c.excluded {
                    let _ = writeln!(out, "{head}: excluded ({ex})");
                    continue;
                }
                let _ = writeln!(out, "{head} (k = {}, {}):", c.k, c.confidence);
                if c.equations.is_empty() {
                    let _ = writeln!(out, "  none");
                }
                for e in &c.equations {
                    let _ = writeln!(out, "  {e}");
                }
            }
            if let Some(l) = &r.linear_case {
                let _ = writeln!(out, "linear case: phi = {}", l.generator.phi);
                let _ = writeln!(out, "  side condition: {} = 0", l.side_condition);
            }
            list(&mut out, "", "notes", &r.notes);
        }
        Payload::Prolong(p) => {
            let _ = writeln!(out, "determining system (xi, eta, A, B functions of x, y):");
            for e in &p.equations {
                let mark = if p.f_dependent.as_deref() == Some(e.label.as_str()) {
                    " *"
                } else {
                    ""
                };
                let _ = writeln!(out, "  [{}]{mark} {} = 0", e.label, e.expr);
            }
            let _ = writeln!(out, "p-vector over ({}):", p.family.join(", "));
            for l in &p.p_vector {
                let _ = writeln!(out, "  {} = {}", l.label, l.expr);
            }
            let _ = writeln!(out, "cross_check = {}", p.cross_check);
            let _ = writeln!(
                out,
                "structure: xi_u = eta_u = 0 forced: {}, phi_uu = 0 forced: {}, F-dependent equations: {}",
                p.forces_xi_eta_u, p.forces_phi_uu, p.f_dependent_count
            );
        }
        Payload::Kernel(k) => {
            let _ = writeln!(out, "ansatz: {}", k.basis);
            let _ = writeln!(out, "kernel:");
            render_kernel_cases(&mut out, &k.cases);
        }
        Payload::Classify(c) => {
            let _ = writeln!(out, "ansatz: {}", c.basis);
            let _ = writeln!(out, "kernel:");
            render_kernel_cases(&mut out, &c.kernel_cases);
            let _ = writeln!(out, "branches: {}", c.branches.len());
            for (i, b) in c.branches.iter().enumerate() {
                render_branch(&mut out, i, b);
            }
            if !c.kernel_only.is_empty() {
                let _ = writeln!(out, "kernel-only cases: {}", c.kernel_only.len());
                for b in &c.kernel_only {
                    let mut line = b.relations.join("; ");
                    if !b.constraints.is_empty() {
                        let _ = write!(line, "  [{}]", b.constraints.join(", "));
                    }
                    let _ = writeln!(out, "  {line}");
                }
            }
            for m in &c.manual {
                let _ = writeln!(out, "manual case [{}]: {}", m.pattern, m.note);
                for e in &m.constraints {
                    let _ = writeln!(out, "  {e} = 0");
                }
            }
            if let Some(l) = &c.linear_case {
                let _ = writeln!(out, "linear case: phi = {}", l.generator.phi);
                let _ = writeln!(out, "  side condition: {} = 0", l.side_condition);
            }
            list(&mut out, "", "equivalence moves", &c.equivalence_moves);
            list(&mut out, "", "notes", &c.notes);
        }
        Payload::Verify(v) => {
            let _ = writeln!(out, "generator: {}", gen_line(&v.generator));
            let _ = writeln!(out, "symbolic: {}", v.symbolic.as_deref().unwrap_or("not decidable"));
            let _ = writeln!(
                out,
                "numeric: max |residual| = {} over {} samples (tol {}, {} bits, seed {})",
                v.numeric_max, v.samples_used, v.tol, v.precision_bits, v.seed
            );
            list(&mut out, "", "constraints assumed", &v.constraints_assumed);
            let _ = writeln!(out, "{}", if v.passed { "PASS" } else { "FAIL" });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals() {
        assert_eq!(
            parse_decimal("1e-25"),
            Some(Rational::new(1.into(), num_traits::pow(10.into(), 25)))
        );
        assert_eq!(parse_decimal("2.5"), Some(crate::expr::rat(5, 2)));
        assert_eq!(parse_decimal("-0.125e1"), Some(crate::expr::rat(-5, 4)));
        assert_eq!(parse_decimal("x"), None);
    }
}
