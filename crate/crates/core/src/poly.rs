//! Multivariate polynomials over the rationals in the named parameters.
//!
//! These are the coefficient ring of every parametric linear system in the
//! crate: relation detection for parametric families and the ansatz solver.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::expr::{base_exp, factors, int, Expr, Node, Rational};

/// Sorted list of (parameter, exponent > 0).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(pub Vec<(String, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut m: BTreeMap<String, u32> = self.0.iter().cloned().collect();
        for (p, e) in &other.0 {
            *m.entry(p.clone()).or_insert(0) += e;
        }
        Monomial(m.into_iter().collect())
    }

    pub fn degree_in(&self, p: &str) -> u32 {
        self.0.iter().find(|(q, _)| q == p).map_or(0, |(_, e)| *e)
    }

    fn without(&self, p: &str) -> Monomial {
        Monomial(self.0.iter().filter(|(q, _)| q != p).cloned().collect())
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ParamPoly {
    terms: BTreeMap<Monomial, Rational>,
}

impl fmt::Debug for ParamPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

impl fmt::Display for ParamPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

impl ParamPoly {
    pub fn zero() -> Self {
        ParamPoly::default()
    }

    pub fn constant(c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        ParamPoly { terms }
    }

    pub fn one() -> Self {
        ParamPoly::constant(int(1))
    }

    pub fn int(n: i64) -> Self {
        ParamPoly::constant(int(n))
    }

    pub fn param(name: &str) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial(vec![(name.to_string(), 1)]), int(1));
        ParamPoly { terms }
    }

    pub fn from_term(c: Rational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        ParamPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn is_nonzero_constant(&self) -> bool {
        self.as_constant().is_some_and(|c| !c.is_zero())
    }

    pub fn params(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .terms
            .keys()
            .flat_map(|m| m.0.iter().map(|(p, _)| p.clone()))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn add(&self, o: &ParamPoly) -> ParamPoly {
        let mut terms = self.terms.clone();
        for (m, c) in &o.terms {
            let slot = terms.entry(m.clone()).or_insert_with(Rational::zero);
            *slot += c;
            if slot.is_zero() {
                terms.remove(m);
            }
        }
        ParamPoly { terms }
    }

    pub fn add_assign(&mut self, o: &ParamPoly) {
        for (m, c) in &o.terms {
            let slot = self.terms.entry(m.clone()).or_insert_with(Rational::zero);
            *slot += c;
            if slot.is_zero() {
                self.terms.remove(m);
            }
        }
    }

    pub fn neg(&self) -> ParamPoly {
        self.scale(&int(-1))
    }

    pub fn sub(&self, o: &ParamPoly) -> ParamPoly {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &Rational) -> ParamPoly {
        if c.is_zero() {
            return ParamPoly::zero();
        }
        ParamPoly {
            terms: self.terms.iter().map(|(m, d)| (m.clone(), d * c)).collect(),
        }
    }

    pub fn mul(&self, o: &ParamPoly) -> ParamPoly {
        let mut out = ParamPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_assign(&ParamPoly::from_term(c1 * c2, m1.mul(m2)));
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> ParamPoly {
        (0..n).fold(ParamPoly::one(), |acc, _| acc.mul(self))
    }

    pub fn degree_in(&self, p: &str) -> u32 {
        self.terms.keys().map(|m| m.degree_in(p)).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.total_degree()).max().unwrap_or(0)
    }

    /// Coefficients as a polynomial in `p`, lowest degree first.
    pub fn coeffs_in(&self, p: &str) -> Vec<ParamPoly> {
        let d = self.degree_in(p) as usize;
        let mut out = vec![ParamPoly::zero(); d + 1];
        for (m, c) in &self.terms {
            let k = m.degree_in(p) as usize;
            out[k].add_assign(&ParamPoly::from_term(c.clone(), m.without(p)));
        }
        out
    }

    pub fn subst(&self, p: &str, value: &ParamPoly) -> ParamPoly {
        if self.degree_in(p) == 0 {
            return self.clone();
        }
        let mut out = ParamPoly::zero();
        for (k, c) in self.coeffs_in(p).iter().enumerate() {
            if !c.is_zero() {
                out.add_assign(&c.mul(&value.pow(k as u32)));
            }
        }
        out
    }

    pub fn subst_all(&self, sigma: &BTreeMap<String, ParamPoly>) -> ParamPoly {
        sigma.iter().fold(self.clone(), |acc, (p, v)| acc.subst(p, v))
    }

    pub fn eval(&self, values: &BTreeMap<String, Rational>) -> Option<Rational> {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (p, e) in &m.0 {
                let v = values.get(p)?;
                for _ in 0..*e {
                    t *= v;
                }
            }
            acc += t;
        }
        Some(acc)
    }

    /// Divides out the rational content, making the leading coefficient
    /// positive. Preserves the zero set.
    pub fn primitive(&self) -> ParamPoly {
        if self.is_zero() {
            return self.clone();
        }
        let mut g_num = BigInt::zero();
        let mut g_den = BigInt::one();
        for c in self.terms.values() {
            g_num = g_num.gcd(c.numer());
            g_den = g_den.lcm(c.denom());
        }
        let lead = self.terms.values().next_back().unwrap();
        let mut content = Rational::new(g_num, g_den);
        if lead.is_negative() {
            content = -content;
        }
        self.scale(&content.recip())
    }

    /// Divides out the monomial common to all terms.
    pub fn strip_monomial(&self) -> ParamPoly {
        let common = self.common_monomial();
        ParamPoly {
            terms: self.terms.iter().map(|(m, c)| (m.divide(&common), c.clone())).collect(),
        }
    }

    pub fn common_monomial(&self) -> Monomial {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return Monomial::one();
        };
        let mut common: BTreeMap<String, u32> = first.0.iter().cloned().collect();
        for m in it {
            common = common
                .into_iter()
                .filter_map(|(p, e)| {
                    let d = m.degree_in(&p).min(e);
                    (d > 0).then_some((p, d))
                })
                .collect();
        }
        Monomial(common.into_iter().collect())
    }

    /// Parameters appearing linearly with a nonzero constant coefficient,
    /// with the value solving `self = 0` for each.
    pub fn linear_solutions(&self) -> Vec<(String, ParamPoly)> {
        let mut out = Vec::new();
        for p in self.params() {
            if self.degree_in(&p) != 1 {
                continue;
            }
            let cs = self.coeffs_in(&p);
            if let Some(a) = cs[1].as_constant() {
                if !a.is_zero() {
                    out.push((p.clone(), cs[0].scale(&(-a.recip()))));
                }
            }
        }
        out
    }

    /// Rational roots when the polynomial is univariate.
    pub fn univariate_rational_roots(&self) -> Option<(String, Vec<Rational>)> {
        let ps = self.params();
        if ps.len() != 1 {
            return None;
        }
        let p = ps[0].clone();
        let cs: Vec<Rational> = self
            .coeffs_in(&p)
            .iter()
            .map(|c| c.as_constant().expect("univariate"))
            .collect();
        let mut den = BigInt::one();
        for c in &cs {
            den = den.lcm(c.denom());
        }
        let ints: Vec<BigInt> = cs
            .iter()
            .map(|c| (c * Rational::from_integer(den.clone())).to_integer())
            .collect();
        let mut roots = Vec::new();
        let low = ints.iter().position(|c| !c.is_zero())?;
        if low > 0 {
            roots.push(Rational::zero());
        }
        let a0 = ints[low].abs().to_i64()?;
        let an = ints.last()?.abs().to_i64()?;
        if a0 > 1_000_000 || an > 1_000_000 {
            return Some((p, roots));
        }
        for num in divisors(a0) {
            for d in divisors(an) {
                for s in [1i64, -1] {
                    let r = Rational::new(BigInt::from(s * num), BigInt::from(d));
                    if roots.contains(&r) {
                        continue;
                    }
                    let v: Rational = cs.iter().rev().fold(Rational::zero(), |acc, c| acc * &r + c);
                    if v.is_zero() {
                        roots.push(r);
                    }
                }
            }
        }
        roots.sort();
        Some((p, roots))
    }

    /// Quotient by `den` when the division is exact.
    pub fn try_div(&self, den: &ParamPoly) -> Option<ParamPoly> {
        if den.is_zero() {
            return None;
        }
        if let Some(c) = den.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        let (dm, dc) = den.lead_term().map(|(m, c)| (m.clone(), c.clone()))?;
        let mut rem = self.clone();
        let mut quot = ParamPoly::zero();
        while let Some((rm, rc)) = rem.lead_term().map(|(m, c)| (m.clone(), c.clone())) {
            let qm = rm.try_divide(&dm)?;
            let t = ParamPoly::from_term(rc / &dc, qm);
            quot = quot.add(&t);
            rem = rem.sub(&t.mul(den));
        }
        Some(quot)
    }

    /// Leading term in graded lexicographic order.
    pub fn lead_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().max_by(|a, b| a.0.grlex_cmp(b.0))
    }

    pub fn to_expr(&self) -> Expr {
        Expr::add_all(self.terms.iter().map(|(m, c)| {
            let mut fs = vec![Expr::constant(c.clone())];
            for (p, e) in &m.0 {
                fs.push(Expr::param(p).powi(*e as i64));
            }
            Expr::mul_all(fs)
        }))
    }

    /// Reads a polynomial in parameters; `None` if the expression is not one.
    pub fn from_expr(e: &Expr) -> Option<ParamPoly> {
        let mut out = ParamPoly::zero();
        for t in e.terms() {
            let (c, m) = t.split_coef();
            let mut mono = Monomial::one();
            for f in factors(&m) {
                let (b, x) = base_exp(&f);
                let Node::Param(p) = b.node() else {
                    return None;
                };
                let n = x.as_integer().filter(|n| *n > 0)?;
                mono = mono.mul(&Monomial(vec![(p.clone(), n as u32)]));
            }
            out.add_assign(&ParamPoly::from_term(c, mono));
        }
        Some(out)
    }
}

impl Monomial {
    /// `self / d` if `d` divides `self`.
    pub fn try_divide(&self, d: &Monomial) -> Option<Monomial> {
        if d.0.iter().all(|(p, e)| self.degree_in(p) >= *e) {
            Some(self.divide(d))
        } else {
            None
        }
    }

    /// Graded lexicographic comparison, a multiplicative monomial order.
    pub fn grlex_cmp(&self, o: &Monomial) -> std::cmp::Ordering {
        self.total_degree().cmp(&o.total_degree()).then_with(|| {
            let mut names: Vec<&String> = self.0.iter().chain(o.0.iter()).map(|(p, _)| p).collect();
            names.sort();
            names.dedup();
            for n in names {
                let c = self.degree_in(n).cmp(&o.degree_in(n));
                if c != std::cmp::Ordering::Equal {
                    return c;
                }
            }
            std::cmp::Ordering::Equal
        })
    }

    fn divide(&self, d: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .filter_map(|(p, e)| {
                    let k = e - d.degree_in(p);
                    (k > 0).then(|| (p.clone(), k))
                })
                .collect(),
        )
    }
}

fn divisors(n: i64) -> Vec<i64> {
    if n == 0 {
        return vec![1];
    }
    (1..=n).filter(|d| n % d == 0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_substitution() {
        let r = ParamPoly::param("r");
        let p = r.add(&ParamPoly::int(2)).mul(&r); // r^2 + 2r
        assert_eq!(p.degree_in("r"), 2);
        let at = p.subst("r", &ParamPoly::int(-2));
        assert!(at.is_zero());
        let (name, roots) = p.univariate_rational_roots().unwrap();
        assert_eq!(name, "r");
        assert_eq!(roots, vec![int(-2), int(0)]);
    }

    #[test]
    fn linear_solution_picks_unit_coefficient() {
        // 2m - 2 - 4k = 0  ->  m = 1 + 2k
        let p = ParamPoly::param("m")
            .scale(&int(2))
            .sub(&ParamPoly::int(2))
            .sub(&ParamPoly::param("k").scale(&int(4)));
        let sols = p.linear_solutions();
        let m = sols.iter().find(|(n, _)| n == "m").unwrap();
        assert_eq!(m.1, ParamPoly::int(1).add(&ParamPoly::param("k").scale(&int(2))));
    }

    #[test]
    fn primitive_keeps_zero_set() {
        let p = ParamPoly::param("q").scale(&int(-6)).mul(&ParamPoly::param("r"));
        let q = p.primitive();
        assert_eq!(q, ParamPoly::param("q").mul(&ParamPoly::param("r")));
        assert_eq!(q.strip_monomial(), ParamPoly::one());
        let e = ParamPoly::param("a").scale(&int(4)).add(&ParamPoly::int(6));
        assert_eq!(
            e.primitive(),
            ParamPoly::param("a").scale(&int(2)).add(&ParamPoly::int(3))
        );
    }

    #[test]
    fn expr_round_trip() {
        let e = crate::parser::parse_expr_with("3*m^2*r - 1/2*r + 4", &["m", "r"]).unwrap();
        let p = ParamPoly::from_expr(&e).unwrap();
        assert_eq!(p.to_expr(), e);
    }
}
