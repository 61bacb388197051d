//! Exact linear algebra over the rationals and over parameter polynomials,
//! plus a high-precision numeric null space for sampled data.

use std::collections::BTreeMap;

use astro_float::{BigFloat, RoundingMode};
use num_bigint::{BigInt, Sign};
use num_traits::{One, Zero};
use thiserror::Error;

use crate::expr::{int, Rational};
use crate::poly::ParamPoly;

pub type Matrix = Vec<Vec<Rational>>;

/// Reduced row echelon form and pivot columns.
pub fn rref(m: &[Vec<Rational>]) -> (Matrix, Vec<usize>) {
    let mut a: Matrix = m.to_vec();
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for v in a[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in c..cols {
                    let d = &f * &a[r][j];
                    a[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    (a, pivots)
}

pub fn rank(m: &[Vec<Rational>]) -> usize {
    rref(m).1.len()
}

/// Basis of `{v : m v = 0}` in reduced row echelon form (each vector's
/// first nonzero entry is 1).
pub fn null_space(m: &[Vec<Rational>], cols: usize) -> Matrix {
    let (r, pivots) = rref(m);
    let mut basis = Vec::new();
    for f in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rational::zero(); cols];
        v[f] = Rational::one();
        for (row, &pc) in r.iter().zip(&pivots) {
            v[pc] = -row[f].clone();
        }
        basis.push(v);
    }
    canonical_basis(&basis)
}

/// Row-reduced basis of the span of `vs`.
pub fn canonical_basis(vs: &[Vec<Rational>]) -> Matrix {
    if vs.is_empty() {
        return Vec::new();
    }
    rref(vs).0
}

/// True if every vector in `a` lies in the span of `b` and vice versa.
pub fn same_span(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> bool {
    canonical_basis(a) == canonical_basis(b)
}

/// Orthogonal projector onto the complement of the row space of `rels`.
pub fn complement_projector(rels: &[Vec<Rational>], d: usize) -> Matrix {
    let mut pi: Matrix = (0..d)
        .map(|i| (0..d).map(|j| if i == j { int(1) } else { int(0) }).collect())
        .collect();
    if rels.is_empty() {
        return pi;
    }
    let basis = canonical_basis(rels);
    let k = basis.len();
    // Gram matrix G = R R^T and its inverse.
    let g: Matrix = (0..k)
        .map(|i| (0..k).map(|j| dot(&basis[i], &basis[j])).collect())
        .collect();
    let ginv = invert(&g).expect("Gram matrix of independent rows");
    for i in 0..d {
        for j in 0..d {
            let mut s = Rational::zero();
            for a in 0..k {
                for b in 0..k {
                    s += &basis[a][i] * &ginv[a][b] * &basis[b][j];
                }
            }
            pi[i][j] -= s;
        }
    }
    pi
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn mat_vec(m: &[Vec<Rational>], v: &[Rational]) -> Vec<Rational> {
    m.iter().map(|r| dot(r, v)).collect()
}

pub fn invert(m: &[Vec<Rational>]) -> Option<Matrix> {
    let n = m.len();
    let aug: Matrix = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut r = r.clone();
            r.extend((0..n).map(|j| if i == j { int(1) } else { int(0) }));
            r
        })
        .collect();
    let (r, pivots) = rref(&aug);
    if pivots.len() != n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
        return None;
    }
    Some(r.into_iter().map(|row| row[n..].to_vec()).collect())
}

// ---------------------------------------------------------------------------
// Floats

/// Exact dyadic rational value of a finite float.
pub fn float_to_rational(f: &BigFloat) -> Rational {
    let Some((words, bits, sign, exp, _)) = f.as_raw_parts() else {
        return Rational::zero();
    };
    if f.is_zero() {
        return Rational::zero();
    }
    let mut digits: Vec<u32> = Vec::with_capacity(words.len() * 2);
    for w in words {
        digits.push(*w as u32);
        digits.push((*w >> 32) as u32);
    }
    let mant = BigInt::from_slice(Sign::Plus, &digits);
    // Mantissa occupies `words.len() * 64` bits with the binary point on the
    // left; `bits` is only the significant count.
    let _ = bits;
    let shift = exp as i64 - (words.len() as i64) * 64;
    let mut q = Rational::from_integer(mant);
    let two = Rational::from_integer(BigInt::from(2));
    if shift >= 0 {
        q *= num_traits::pow(two, shift as usize);
    } else {
        q /= num_traits::pow(two, (-shift) as usize);
    }
    if sign == astro_float::Sign::Neg {
        q = -q;
    }
    q
}

fn bf_abs_lt(f: &BigFloat, tol: &BigFloat) -> bool {
    f.abs().cmp(tol).is_some_and(|c| c < 0)
}

/// Closest rational with denominator at most `max_den` (continued fractions).
pub fn rationalize(q: &Rational, max_den: i64) -> Rational {
    let max_den = BigInt::from(max_den);
    let (mut p0, mut q0, mut p1, mut q1) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let mut x = q.clone();
    loop {
        let a = x.floor().to_integer();
        let q2 = &q0 + &a * &q1;
        if q2 > max_den {
            break;
        }
        let p2 = &p0 + &a * &p1;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let frac = &x - Rational::from_integer(a);
        if frac.is_zero() {
            break;
        }
        x = frac.recip();
    }
    if q1.is_zero() {
        return Rational::from_integer(q.round().to_integer());
    }
    Rational::new(p1, q1)
}

/// Null space of a float matrix with rank tolerance `tol`, each basis vector
/// rounded to nearby rationals. Returns the rationalized basis in row
/// echelon form.
pub fn numeric_null_space(m: &[Vec<BigFloat>], cols: usize, prec: usize, tol: &BigFloat) -> Matrix {
    let rm = RoundingMode::ToEven;
    let mut a: Vec<Vec<BigFloat>> = m.to_vec();
    let rows = a.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        // Partial pivoting.
        let mut best = r;
        for i in r + 1..rows {
            if a[i][c].abs().cmp(&a[best][c].abs()).is_some_and(|o| o > 0) {
                best = i;
            }
        }
        if bf_abs_lt(&a[best][c], tol) {
            continue;
        }
        a.swap(r, best);
        let piv = a[r][c].clone();
        for j in 0..cols {
            a[r][j] = a[r][j].div(&piv, prec, rm);
        }
        for i in 0..rows {
            if i != r {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let d = f.mul(&a[r][j], prec, rm);
                    a[i][j] = a[i][j].sub(&d, prec, rm);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let mut basis = Vec::new();
    for f in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rational::zero(); cols];
        v[f] = Rational::one();
        for (i, &pc) in pivots.iter().enumerate() {
            v[pc] = -rationalize(&float_to_rational(&a[i][f]), 1_000_000);
        }
        basis.push(v);
    }
    canonical_basis(&basis)
}

// ---------------------------------------------------------------------------
// Parametric systems

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("parameter case splits exceed the cap of {0}")]
    BranchExplosion(usize),
}

pub const DEFAULT_BRANCH_CAP: usize = 64;

/// Parameter assumptions carried by a branch.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Conditions {
    /// Parameter values fixed on this branch.
    pub equalities: BTreeMap<String, ParamPoly>,
    /// Primitive polynomials assumed nonzero.
    pub inequations: Vec<ParamPoly>,
}

impl Conditions {
    pub fn apply(&self, p: &ParamPoly) -> ParamPoly {
        if self.equalities.is_empty() {
            p.clone()
        } else {
            p.subst_all(&self.equalities)
        }
    }

    /// Adds `param = value`, rewriting earlier equalities. Returns false if
    /// an inequation is violated.
    pub fn assign(&mut self, param: &str, value: &ParamPoly) -> bool {
        let one: BTreeMap<String, ParamPoly> = [(param.to_string(), value.clone())].into();
        for v in self.equalities.values_mut() {
            *v = v.subst_all(&one);
        }
        self.equalities.insert(param.to_string(), value.clone());
        let mut kept = Vec::new();
        for q in &self.inequations {
            let q2 = q.subst_all(&one);
            if q2.is_zero() {
                return false;
            }
            if !q2.is_constant() {
                kept.push(q2.primitive());
            }
        }
        kept.sort();
        kept.dedup();
        self.inequations = kept;
        true
    }

    /// Records `p != 0`; returns false if `p` is identically zero here.
    pub fn assume_nonzero(&mut self, p: &ParamPoly) -> bool {
        let p = self.apply(p);
        if p.is_zero() {
            return false;
        }
        if p.is_constant() {
            return true;
        }
        // Split off monomial factors so that m*r != 0 records m and r.
        let mono = p.common_monomial();
        for (name, _) in &mono.0 {
            let q = ParamPoly::param(name);
            if !self.inequations.contains(&q) {
                self.inequations.push(q);
            }
        }
        let rest = p.strip_monomial();
        if !rest.is_constant() {
            let r = rest.primitive();
            if !self.inequations.contains(&r) {
                self.inequations.push(r);
            }
        }
        self.inequations.sort();
        true
    }

    pub fn known_nonzero(&self, p: &ParamPoly) -> bool {
        let p = self.apply(p);
        if p.is_nonzero_constant() {
            return true;
        }
        if p.is_zero() {
            return false;
        }
        let mono = p.common_monomial();
        let rest = p.strip_monomial();
        let mono_ok = mono
            .0
            .iter()
            .all(|(n, _)| self.inequations.contains(&ParamPoly::param(n)));
        mono_ok && (rest.is_nonzero_constant() || self.inequations.contains(&rest.primitive()))
    }

    pub fn is_empty(&self) -> bool {
        self.equalities.is_empty() && self.inequations.is_empty()
    }

    /// Human-readable constraint strings, e.g. `r = -2`, `m - 1 != 0`.
    pub fn describe(&self) -> Vec<String> {
        let mut out: Vec<String> = self.equalities.iter().map(|(p, v)| format!("{p} = {v}")).collect();
        out.extend(self.inequations.iter().map(|q| format!("{q} != 0")));
        out
    }
}

/// One branch of a parametric null-space computation.
#[derive(Clone, Debug)]
pub struct ParamNullSpace {
    pub conditions: Conditions,
    pub basis: Vec<Vec<ParamPoly>>,
    /// Set when a pivot condition could not be solved for any parameter;
    /// the branch then assumes it nonzero and carries this note.
    pub unresolved: Vec<ParamPoly>,
}

struct State {
    rows: Vec<Vec<ParamPoly>>,
    cols: usize,
    // (row index, pivot column) pairs already fixed.
    pivots: Vec<(usize, usize)>,
    next_col: usize,
    cond: Conditions,
    unresolved: Vec<ParamPoly>,
}

fn row_primitive(row: &mut [ParamPoly]) {
    // Divide by the rational content common to all entries.
    let mut g_num = BigInt::zero();
    let mut g_den = BigInt::one();
    let mut any = false;
    for e in row.iter() {
        for (_, c) in e.terms() {
            any = true;
            g_num = num_integer::Integer::gcd(&g_num, c.numer());
            g_den = num_integer::Integer::lcm(&g_den, c.denom());
        }
    }
    if !any || g_num.is_zero() {
        return;
    }
    let content = Rational::new(g_num, g_den);
    if content.is_one() {
        return;
    }
    let inv = content.recip();
    for e in row.iter_mut() {
        *e = e.scale(&inv);
    }
}

fn pivot_rank(p: &ParamPoly) -> (usize, u32, usize) {
    (if p.is_constant() { 0 } else { 1 }, p.total_degree(), p.num_terms())
}

/// Ways in which `p = 0` can hold: each is a list of assignments applied in
/// order. `None` if the zero set cannot be parametrized.
fn zero_cases(p: &ParamPoly) -> Option<Vec<(String, ParamPoly)>> {
    let mut cases = Vec::new();
    for (name, _) in &p.common_monomial().0 {
        cases.push((name.clone(), ParamPoly::zero()));
    }
    let rest = p.strip_monomial();
    if rest.is_constant() {
        return Some(cases);
    }
    if let Some((name, v)) = rest.linear_solutions().into_iter().next() {
        cases.push((name, v));
        return Some(cases);
    }
    if let Some((name, roots)) = rest.univariate_rational_roots() {
        cases.extend(roots.into_iter().map(|r| (name.clone(), ParamPoly::constant(r))));
        return Some(cases);
    }
    if cases.is_empty() {
        None
    } else {
        Some(cases)
    }
}

fn eliminate(mut st: State, out: &mut Vec<ParamNullSpace>, cap: usize) -> Result<(), LinalgError> {
    loop {
        if out.len() > cap {
            return Err(LinalgError::BranchExplosion(cap));
        }
        if st.next_col >= st.cols {
            out.push(finish(st));
            return Ok(());
        }
        let c = st.next_col;
        let used: Vec<usize> = st.pivots.iter().map(|p| p.0).collect();
        let cands: Vec<usize> = (0..st.rows.len())
            .filter(|i| !used.contains(i) && !st.rows[*i][c].is_zero())
            .collect();
        if cands.is_empty() {
            st.next_col += 1;
            continue;
        }
        let best = *cands
            .iter()
            .min_by_key(|&&i| {
                let p = &st.rows[i][c];
                let known = st.cond.known_nonzero(p);
                (!known as usize, pivot_rank(p), i)
            })
            .unwrap();
        let piv = st.rows[best][c].clone();
        if !st.cond.known_nonzero(&piv) {
            // Branch: pivot vanishes.
            match zero_cases(&piv) {
                Some(cases) => {
                    for (name, value) in cases {
                        let mut cond = st.cond.clone();
                        if !cond.assign(&name, &value) {
                            continue;
                        }
                        let one: BTreeMap<String, ParamPoly> = [(name.clone(), value)].into();
                        let rows = st
                            .rows
                            .iter()
                            .map(|r| {
                                let mut r: Vec<ParamPoly> = r.iter().map(|e| e.subst_all(&one)).collect();
                                row_primitive(&mut r);
                                r
                            })
                            .collect();
                        // Earlier pivots stay nonzero: `assign` pruned
                        // contradictions with the recorded inequations.
                        let sub = State {
                            rows,
                            cols: st.cols,
                            pivots: st.pivots.clone(),
                            next_col: st.next_col,
                            cond,
                            unresolved: st.unresolved.clone(),
                        };
                        eliminate(sub, out, cap)?;
                    }
                }
                None => st.unresolved.push(piv.primitive()),
            }
            if !st.cond.assume_nonzero(&piv) {
                return Ok(());
            }
        }
        // Fraction-free Gauss-Jordan step on column c.
        for i in 0..st.rows.len() {
            if i == best || st.rows[i][c].is_zero() {
                continue;
            }
            let f = st.rows[i][c].clone();
            let new: Vec<ParamPoly> = (0..st.cols)
                .map(|j| st.rows[i][j].mul(&piv).sub(&f.mul(&st.rows[best][j])))
                .collect();
            st.rows[i] = new;
            row_primitive(&mut st.rows[i]);
        }
        st.pivots.push((best, c));
        st.next_col += 1;
    }
}

fn finish(st: State) -> ParamNullSpace {
    let pivot_cols: Vec<usize> = st.pivots.iter().map(|p| p.1).collect();
    let mut basis = Vec::new();
    for f in (0..st.cols).filter(|c| !pivot_cols.contains(c)) {
        // Rows with a nonzero entry in the free column.
        let involved: Vec<(usize, usize)> = st
            .pivots
            .iter()
            .copied()
            .filter(|(r, _)| !st.rows[*r][f].is_zero())
            .collect();
        let mut lcm = ParamPoly::one();
        let mut seen: Vec<ParamPoly> = Vec::new();
        for (r, c) in &involved {
            let p = st.rows[*r][*c].clone();
            if p.is_constant() {
                continue;
            }
            if !seen.contains(&p) {
                lcm = lcm.mul(&p);
                seen.push(p);
            }
        }
        let mut v = vec![ParamPoly::zero(); st.cols];
        v[f] = lcm.clone();
        for (r, c) in &involved {
            let piv = &st.rows[*r][*c];
            let num = st.rows[*r][f].mul(&lcm).neg();
            v[*c] = exact_div(&num, piv);
        }
        row_primitive(&mut v);
        basis.push(v);
    }
    ParamNullSpace {
        conditions: st.cond,
        basis: reduce_param_basis(basis),
        unresolved: st.unresolved,
    }
}

/// Exact division of `num` by `den` where `den` divides `num`: either `den`
/// is constant or `num` is a product containing `den` as a factor.
fn exact_div(num: &ParamPoly, den: &ParamPoly) -> ParamPoly {
    if let Some(c) = den.as_constant() {
        return num.scale(&c.recip());
    }
    // num = k * den for some polynomial k: long division in the leading
    // monomial order.
    let mut rem = num.clone();
    let mut quot = ParamPoly::zero();
    let (dm, dc) = {
        let (m, c) = den.lead_term().unwrap();
        (m.clone(), c.clone())
    };
    for _ in 0..10_000 {
        if rem.is_zero() {
            return quot;
        }
        let (rm, rc) = {
            let (m, c) = rem.lead_term().unwrap();
            (m.clone(), c.clone())
        };
        let Some(qm) = rm.try_divide(&dm) else {
            break;
        };
        let t = ParamPoly::from_term(rc / &dc, qm);
        quot = quot.add(&t);
        rem = rem.sub(&t.mul(den));
    }
    panic!("inexact polynomial division of {num} by {den}");
}

/// Divides a polynomial vector by the common monomial and by any factor of
/// its first entry that divides every entry.
fn strip_common_factor(v: Vec<ParamPoly>) -> Vec<ParamPoly> {
    let Some(lead) = v.iter().find(|e| !e.is_zero()).cloned() else {
        return v;
    };
    let mut v = v;
    let mut candidates = vec![lead.primitive()];
    if let Some((p, roots)) = lead.univariate_rational_roots() {
        for r in roots {
            candidates.push(ParamPoly::param(&p).sub(&ParamPoly::constant(r)));
        }
    }
    for p in lead.common_monomial().0.iter().map(|(p, _)| p.clone()) {
        candidates.push(ParamPoly::param(&p));
    }
    for c in candidates {
        if c.is_constant() {
            continue;
        }
        for _ in 0..16 {
            let q: Option<Vec<ParamPoly>> = v.iter().map(|e| e.try_div(&c)).collect();
            match q {
                Some(q) => v = q,
                None => break,
            }
        }
    }
    row_primitive(&mut v);
    v
}

/// Normalizes a parametric basis: rational vectors are row-reduced; a
/// vector is scaled so its first nonzero entry is 1 when that entry is a
/// constant.
fn reduce_param_basis(basis: Vec<Vec<ParamPoly>>) -> Vec<Vec<ParamPoly>> {
    let all_const = basis.iter().all(|v| v.iter().all(|e| e.is_constant()));
    if all_const && !basis.is_empty() {
        let m: Matrix = basis
            .iter()
            .map(|v| v.iter().map(|e| e.as_constant().unwrap()).collect())
            .collect();
        return canonical_basis(&m)
            .into_iter()
            .map(|v| v.into_iter().map(ParamPoly::constant).collect())
            .collect();
    }
    basis
        .into_iter()
        .map(strip_common_factor)
        .map(|v| {
            let lead = v.iter().find(|e| !e.is_zero()).and_then(|e| e.as_constant());
            match lead {
                Some(c) if !c.is_zero() => v.iter().map(|e| e.scale(&c.recip())).collect(),
                _ => v,
            }
        })
        .collect()
}

/// Null space of a matrix over parameter polynomials, split into parameter
/// branches. Each branch lists the parameter assumptions it holds under.
pub fn param_null_space(
    m: &[Vec<ParamPoly>],
    cols: usize,
    start: &Conditions,
    cap: usize,
) -> Result<Vec<ParamNullSpace>, LinalgError> {
    let rows: Vec<Vec<ParamPoly>> = m
        .iter()
        .map(|r| {
            let mut r: Vec<ParamPoly> = r.iter().map(|e| start.apply(e)).collect();
            row_primitive(&mut r);
            r
        })
        .filter(|r| r.iter().any(|e| !e.is_zero()))
        .collect();
    let st = State {
        rows,
        cols,
        pivots: Vec::new(),
        next_col: 0,
        cond: start.clone(),
        unresolved: Vec::new(),
    };
    let mut out = Vec::new();
    eliminate(st, &mut out, cap)?;
    if out.len() > cap {
        return Err(LinalgError::BranchExplosion(cap));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::rat;

    fn q(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&n| int(n)).collect()
    }

    #[test]
    fn null_space_of_rank_one() {
        let m = vec![q(&[1, 2, 3]), q(&[2, 4, 6])];
        let ns = null_space(&m, 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(mat_vec(&m, v).iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn projector_kills_relations() {
        let rels = vec![q(&[1, -1, 0]), q(&[0, 1, 1])];
        let pi = complement_projector(&rels, 3);
        for r in &rels {
            assert!(mat_vec(&pi, r).iter().all(|x| x.is_zero()));
        }
        // Idempotent.
        let pi2: Matrix = (0..3)
            .map(|i| (0..3).map(|j| (0..3).map(|k| &pi[i][k] * &pi[k][j]).sum()).collect())
            .collect();
        assert_eq!(pi, pi2);
    }

    #[test]
    fn rationalize_recovers_small_fractions() {
        let approx = rat(1, 3) + Rational::new(1.into(), BigInt::from(10).pow(30u32));
        assert_eq!(rationalize(&approx, 1000), rat(1, 3));
    }

    #[test]
    fn float_roundtrip() {
        let f = BigFloat::from_f64(-0.375, 128);
        assert_eq!(float_to_rational(&f), rat(-3, 8));
        let g = BigFloat::from_i64(12, 128);
        assert_eq!(float_to_rational(&g), int(12));
    }

    #[test]
    fn parametric_branch_on_pivot() {
        // [[r + 2, 0], [0, 1]] : null space nontrivial only when r = -2.
        let r = ParamPoly::param("r");
        let m = vec![
            vec![r.add(&ParamPoly::int(2)), ParamPoly::zero()],
            vec![ParamPoly::zero(), ParamPoly::one()],
        ];
        let br = param_null_space(&m, 2, &Conditions::default(), 64).unwrap();
        assert_eq!(br.len(), 2);
        let special = br.iter().find(|b| !b.conditions.equalities.is_empty()).unwrap();
        assert_eq!(special.conditions.equalities["r"], ParamPoly::int(-2));
        assert_eq!(special.basis.len(), 1);
        let generic = br.iter().find(|b| b.conditions.equalities.is_empty()).unwrap();
        assert!(generic.basis.is_empty());
    }

    #[test]
    fn contradictory_branch_is_pruned() {
        let r = ParamPoly::param("r");
        let m = vec![vec![r.clone(), ParamPoly::zero()], vec![ParamPoly::zero(), r]];
        let br = param_null_space(&m, 2, &Conditions::default(), 64).unwrap();
        // r = 0 gives the full plane; r != 0 gives nothing. No third case.
        assert_eq!(br.len(), 2);
    }
}
