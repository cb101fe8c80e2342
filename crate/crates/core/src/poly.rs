//! Sparse multivariate polynomials over the rationals with a `Z^ℓ`
//! multigrading on the variables.
//!
//! A variable is a basis slot of `g ⊗ A` (or of its dual): it carries the
//! index of a Lie-algebra basis element, the exponent vector `ω` of the
//! algebra factor `τ^ω` (or `ε^ω` in the dual picture), and a flag telling
//! the two pictures apart.  Monomials and polynomials are kept in canonical
//! `BTreeMap` form so that iteration order, and hence emitted JSON, is
//! deterministic.

use crate::degree::DegVec;
use crate::rational::{rat_from_str, Rational};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("variable {0} is not mapped")]
    UnmappedVariable(VarId),
    #[error("invalid polynomial JSON: {0}")]
    InvalidJson(String),
}

/// A variable of the polynomial ring: basis index, grading degree, picture.
///
/// `dual = false` means the variable is the basis element `b ⊗ τ^ω` itself
/// (so polynomials are elements of `S(g ⊗ A)`); `dual = true` means it is
/// the coordinate function `b* ⊗ ε^ω` (elements of `S((g ⊗ A)*)`).  The
/// derived order is lexicographic on (degree, basis, dual).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VarId {
    pub degree: DegVec,
    pub basis: usize,
    pub dual: bool,
}

impl VarId {
    pub fn primal(basis: usize, degree: DegVec) -> Self {
        VarId {
            degree,
            basis,
            dual: false,
        }
    }

    pub fn dual(basis: usize, degree: DegVec) -> Self {
        VarId {
            degree,
            basis,
            dual: true,
        }
    }

    /// Degree-zero variable, the `b_i` (or `b_i*`) of the base algebra.
    pub fn base(basis: usize, ell: usize, dual: bool) -> Self {
        VarId {
            degree: DegVec::zero(ell),
            basis,
            dual,
        }
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let star = if self.dual { "*" } else { "" };
        write!(f, "x{}{}{}", self.basis, star, self.degree)
    }
}

/// A monomial: finite map from variables to positive exponents.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Monomial(BTreeMap<VarId, u32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(BTreeMap::new())
    }

    pub fn var(v: VarId) -> Self {
        let mut m = BTreeMap::new();
        m.insert(v, 1);
        Monomial(m)
    }

    pub fn from_powers(powers: impl IntoIterator<Item = (VarId, u32)>) -> Self {
        let mut m = BTreeMap::new();
        for (v, e) in powers {
            if e > 0 {
                *m.entry(v).or_insert(0) += e;
            }
        }
        Monomial(m)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn powers(&self) -> impl Iterator<Item = (&VarId, u32)> {
        self.0.iter().map(|(v, &e)| (v, e))
    }

    pub fn exponent(&self, v: &VarId) -> u32 {
        self.0.get(v).copied().unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut m = self.0.clone();
        for (v, e) in &other.0 {
            *m.entry(v.clone()).or_insert(0) += e;
        }
        Monomial(m)
    }

    /// Total polynomial degree (sum of exponents).
    pub fn total_degree(&self) -> u32 {
        self.0.values().sum()
    }

    /// The `Z^ℓ` degree: sum of `exponent · degree(var)` over the variables.
    ///
    /// The empty monomial has degree zero, which is why the ambient `ℓ`
    /// must be supplied.
    pub fn gamma_degree(&self, ell: usize) -> DegVec {
        let mut acc = DegVec::zero(ell);
        for (v, e) in &self.0 {
            acc = acc.add(&v.degree.scale(*e as i64));
        }
        acc
    }

    /// Divides out one power of `v`; `None` if `v` does not occur.
    pub fn div_var(&self, v: &VarId) -> Option<Monomial> {
        let e = *self.0.get(v)?;
        let mut m = self.0.clone();
        if e == 1 {
            m.remove(v);
        } else {
            m.insert(v.clone(), e - 1);
        }
        Some(Monomial(m))
    }

    /// Whether `other` divides `self`.
    pub fn divisible_by(&self, other: &Monomial) -> bool {
        other.0.iter().all(|(v, e)| self.exponent(v) >= *e)
    }

    /// Exact quotient; caller must ensure divisibility.
    pub fn div(&self, other: &Monomial) -> Monomial {
        debug_assert!(self.divisible_by(other));
        let mut m = self.0.clone();
        for (v, e) in &other.0 {
            let cur = m.get_mut(v).expect("divisor variable missing");
            *cur -= e;
            if *cur == 0 {
                m.remove(v);
            }
        }
        Monomial(m)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, (v, e)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write!(f, "{v}")?;
            if *e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// A polynomial: finite map from monomials to nonzero rational coefficients.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Polynomial::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        Polynomial { terms }
    }

    pub fn variable(v: VarId) -> Self {
        Polynomial::from_terms([(Monomial::var(v), Rational::one())])
    }

    pub fn monomial(m: Monomial, c: Rational) -> Self {
        Polynomial::from_terms([(m, c)])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Polynomial::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// The coefficient of the empty monomial.
    pub fn constant_term(&self) -> Rational {
        self.coefficient(&Monomial::one())
    }

    /// The set of variables occurring in the polynomial.
    pub fn variables(&self) -> BTreeSet<VarId> {
        self.terms
            .keys()
            .flat_map(|m| m.powers().map(|(v, _)| v.clone()))
            .collect()
    }

    /// Maximum total degree of the terms, or `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.total_degree()).max()
    }

    /// `Some(k)` when every term has total degree `k`.  The zero polynomial
    /// is homogeneous of every degree; returns `Some(0)` for it.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(|m| m.total_degree());
        let first = match it.next() {
            None => return Some(0),
            Some(d) => d,
        };
        it.all(|d| d == first).then_some(first)
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut acc = Polynomial::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Sum of the terms whose `Z^ℓ` degree equals `gamma`.
    pub fn homogeneous_component(&self, gamma: &DegVec, ell: usize) -> Polynomial {
        Polynomial {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| &m.gamma_degree(ell) == gamma)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Splits the polynomial into its `Z^ℓ`-graded components.
    pub fn gamma_components(&self, ell: usize) -> BTreeMap<DegVec, Polynomial> {
        let mut out: BTreeMap<DegVec, Polynomial> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.gamma_degree(ell))
                .or_insert_with(Polynomial::zero)
                .add_term(m.clone(), c.clone());
        }
        out
    }

    /// Image under the algebra homomorphism sending each variable to its
    /// assigned polynomial.  Every variable of `self` must be mapped.
    pub fn substitute(&self, sigma: &BTreeMap<VarId, Polynomial>) -> Result<Polynomial, PolyError> {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let mut factor = Polynomial::constant(c.clone());
            for (v, e) in m.powers() {
                let image = sigma
                    .get(v)
                    .ok_or_else(|| PolyError::UnmappedVariable(v.clone()))?;
                factor = &factor * &image.pow(e);
            }
            out = &out + &factor;
        }
        Ok(out)
    }

    /// Exact evaluation at a rational point covering all variables.
    pub fn evaluate(&self, point: &BTreeMap<VarId, Rational>) -> Result<Rational, PolyError> {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut val = c.clone();
            for (v, e) in m.powers() {
                let x = point
                    .get(v)
                    .ok_or_else(|| PolyError::UnmappedVariable(v.clone()))?;
                for _ in 0..e {
                    val *= x;
                }
            }
            acc += val;
        }
        Ok(acc)
    }

    /// Formal partial derivative with respect to `v`.
    pub fn partial_derivative(&self, v: &VarId) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            if let Some(q) = m.div_var(v) {
                let e = m.exponent(v);
                out.add_term(q, c * Rational::from_integer(e.into()));
            }
        }
        out
    }

    /// The coefficient of `t` in `self(base + t·dir)`, computed by
    /// substituting with a fresh formal parameter and extracting the linear
    /// part.  Variables missing from `base` default to zero there; every
    /// variable must appear in `base` or `dir`.
    pub fn directional_derivative(
        &self,
        base: &BTreeMap<VarId, Polynomial>,
        dir: &BTreeMap<VarId, Rational>,
    ) -> Result<Polynomial, PolyError> {
        let t = fresh_parameter();
        let t_poly = Polynomial::variable(t.clone());
        let mut sigma: BTreeMap<VarId, Polynomial> = BTreeMap::new();
        for v in self.variables() {
            let b = base.get(&v).cloned();
            let d = dir.get(&v).cloned();
            if b.is_none() && d.is_none() {
                return Err(PolyError::UnmappedVariable(v));
            }
            let mut image = b.unwrap_or_else(Polynomial::zero);
            if let Some(d) = d {
                image = &image + &t_poly.scale(&d);
            }
            sigma.insert(v, image);
        }
        let expanded = self.substitute(&sigma)?;
        let mut linear = Polynomial::zero();
        for (m, c) in &expanded.terms {
            if m.exponent(&t) == 1 {
                linear.add_term(m.div_var(&t).unwrap(), c.clone());
            }
        }
        Ok(linear)
    }

    /// Directional derivative at a rational base point, as a scalar.
    pub fn directional_derivative_at(
        &self,
        base: &BTreeMap<VarId, Rational>,
        dir: &BTreeMap<VarId, Rational>,
    ) -> Result<Rational, PolyError> {
        let base_polys = base
            .iter()
            .map(|(v, c)| (v.clone(), Polynomial::constant(c.clone())))
            .collect();
        let d = self.directional_derivative(&base_polys, dir)?;
        Ok(d.constant_term())
    }

    /// Exact division by `divisor`; `None` when the division is not exact.
    ///
    /// Leading terms are taken in the lexicographic monomial order, which
    /// is multiplicative (the storage order of the term map is not), so an
    /// exact quotient always reduces step by step.
    pub fn div_exact(&self, divisor: &Polynomial) -> Option<Polynomial> {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let lead = |p: &Polynomial| -> (Monomial, Rational) {
            let (m, c) = p
                .terms
                .iter()
                .max_by(|(a, _), (b, _)| cmp_monomial_lex(a, b))
                .expect("nonzero polynomial");
            (m.clone(), c.clone())
        };
        let (lead_m, lead_c) = lead(divisor);
        let mut rem = self.clone();
        let mut quot = Polynomial::zero();
        while !rem.is_zero() {
            let (m, c) = lead(&rem);
            if !m.divisible_by(&lead_m) {
                return None;
            }
            let step = Polynomial::monomial(m.div(&lead_m), &c / &lead_c);
            rem = &rem - &(&step * divisor);
            quot = &quot + &step;
        }
        Some(quot)
    }
}

/// Lexicographic monomial order: exponents are compared variable by
/// variable in the canonical variable order, larger exponent first.
/// Compatible with multiplication, unlike the map storage order.
pub fn cmp_monomial_lex(a: &Monomial, b: &Monomial) -> std::cmp::Ordering {
    let mut ia = a.powers().peekable();
    let mut ib = b.powers().peekable();
    loop {
        match (ia.peek(), ib.peek()) {
            (None, None) => return std::cmp::Ordering::Equal,
            (None, Some(_)) => return std::cmp::Ordering::Less,
            (Some(_), None) => return std::cmp::Ordering::Greater,
            (Some((va, ea)), Some((vb, eb))) => match va.cmp(vb) {
                // the earlier variable is present with a positive exponent
                // only on one side: that side is larger
                std::cmp::Ordering::Less => return std::cmp::Ordering::Greater,
                std::cmp::Ordering::Greater => return std::cmp::Ordering::Less,
                std::cmp::Ordering::Equal => {
                    if ea != eb {
                        return ea.cmp(eb);
                    }
                    ia.next();
                    ib.next();
                }
            },
        }
    }
}

/// The reserved parameter used by [`Polynomial::directional_derivative`].
/// Its empty degree vector cannot collide with any algebra variable.
fn fresh_parameter() -> VarId {
    VarId {
        degree: DegVec(Vec::new()),
        basis: usize::MAX,
        dual: false,
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{c}*{m}")?;
            }
        }
        Ok(())
    }
}

// JSON wire format: an array of terms in canonical order, each term an
// object {"coeff": {"num": .., "den": ..}, "vars": [{"basis", "deg",
// "dual", "exp"}, ..]} with variables in canonical order.

#[derive(Serialize, Deserialize)]
struct CoeffJson {
    num: String,
    den: String,
}

#[derive(Serialize, Deserialize)]
struct VarJson {
    basis: usize,
    deg: Vec<i64>,
    dual: bool,
    exp: u32,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    coeff: CoeffJson,
    vars: Vec<VarJson>,
}

impl Polynomial {
    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<TermJson> = self
            .terms
            .iter()
            .map(|(m, c)| TermJson {
                coeff: CoeffJson {
                    num: c.numer().to_string(),
                    den: c.denom().to_string(),
                },
                vars: m
                    .powers()
                    .map(|(v, e)| VarJson {
                        basis: v.basis,
                        deg: v.degree.0.clone(),
                        dual: v.dual,
                        exp: e,
                    })
                    .collect(),
            })
            .collect();
        serde_json::to_value(terms).expect("polynomial serialization cannot fail")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Polynomial, PolyError> {
        let terms: Vec<TermJson> = serde_json::from_value(value.clone())
            .map_err(|e| PolyError::InvalidJson(e.to_string()))?;
        let mut p = Polynomial::zero();
        for t in terms {
            let c = rat_from_str(&format!("{}/{}", t.coeff.num, t.coeff.den))
                .map_err(PolyError::InvalidJson)?;
            let m = Monomial::from_powers(t.vars.into_iter().map(|v| {
                (
                    VarId {
                        degree: DegVec(v.deg),
                        basis: v.basis,
                        dual: v.dual,
                    },
                    v.exp,
                )
            }));
            p.add_term(m, c);
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    fn v(basis: usize, deg: Vec<i64>) -> VarId {
        VarId::primal(basis, DegVec(deg))
    }

    #[test]
    fn gamma_degree_unit_monomial() {
        assert_eq!(Monomial::one().gamma_degree(2), DegVec(vec![0, 0]));
    }

    #[test]
    fn gamma_degree_is_additive() {
        // h at degree (1) times h at degree (0)
        let m = Monomial::from_powers([(v(2, vec![1]), 1), (v(2, vec![0]), 1)]);
        assert_eq!(m.gamma_degree(1), DegVec(vec![1]));
    }

    #[test]
    fn gamma_degree_weighted_sum() {
        // 2·(2,1) + 1·(0,1) = (4,3)
        let m = Monomial::from_powers([(v(0, vec![2, 1]), 2), (v(1, vec![0, 1]), 1)]);
        assert_eq!(m.gamma_degree(2), DegVec(vec![4, 3]));
    }

    #[test]
    fn homogeneous_component_no_match_and_idempotence() {
        let p = Polynomial::variable(v(0, vec![1]));
        assert!(p.homogeneous_component(&DegVec(vec![5]), 1).is_zero());
        assert_eq!(p.homogeneous_component(&DegVec(vec![1]), 1), p);
    }

    #[test]
    fn components_reassemble() {
        let p = &(&Polynomial::variable(v(0, vec![1])) * &Polynomial::variable(v(1, vec![0])))
            + &Polynomial::variable(v(2, vec![0])).pow(2);
        let parts = p.gamma_components(1);
        assert_eq!(parts.len(), 2);
        let mut sum = Polynomial::zero();
        for q in parts.values() {
            sum = &sum + q;
        }
        assert_eq!(sum, p);
    }

    #[test]
    fn substitute_identity_and_zero() {
        let p = &Polynomial::variable(v(0, vec![0])).pow(2) + &Polynomial::constant(rat_int(3));
        let identity: BTreeMap<_, _> = p
            .variables()
            .into_iter()
            .map(|x| (x.clone(), Polynomial::variable(x)))
            .collect();
        assert_eq!(p.substitute(&identity).unwrap(), p);

        let zeros: BTreeMap<_, _> = p
            .variables()
            .into_iter()
            .map(|x| (x, Polynomial::zero()))
            .collect();
        assert_eq!(
            p.substitute(&zeros).unwrap(),
            Polynomial::constant(rat_int(3))
        );
    }

    #[test]
    fn substitute_binomial() {
        let x = v(0, vec![0]);
        let p = Polynomial::variable(x.clone()).pow(2);
        let image = &Polynomial::variable(v(1, vec![0])) + &Polynomial::variable(v(2, vec![0]));
        let mut sigma = BTreeMap::new();
        sigma.insert(x, image);
        let q = p.substitute(&sigma).unwrap();
        let expected = &(&Polynomial::variable(v(1, vec![0])).pow(2)
            + &(&Polynomial::variable(v(1, vec![0])) * &Polynomial::variable(v(2, vec![0])))
                .scale(&rat_int(2)))
            + &Polynomial::variable(v(2, vec![0])).pow(2);
        assert_eq!(q, expected);
    }

    #[test]
    fn substitute_unmapped_variable_errors() {
        let p = Polynomial::variable(v(0, vec![0]));
        let err = p.substitute(&BTreeMap::new()).unwrap_err();
        assert!(matches!(err, PolyError::UnmappedVariable(_)));
    }

    #[test]
    fn evaluate_casimir_at_point() {
        // (1/64)(h^2 + 4 x- x+) at h=2, x-=x+=1 gives 1/8.
        let (xp, xm, h) = (v(0, vec![0]), v(1, vec![0]), v(2, vec![0]));
        let rho = (&Polynomial::variable(h.clone()).pow(2)
            + &(&Polynomial::variable(xm.clone()) * &Polynomial::variable(xp.clone()))
                .scale(&rat_int(4)))
            .scale(&rat(1, 64));
        let mut pt = BTreeMap::new();
        pt.insert(h, rat_int(2));
        pt.insert(xm, rat_int(1));
        pt.insert(xp, rat_int(1));
        assert_eq!(rho.evaluate(&pt).unwrap(), rat(1, 8));
    }

    #[test]
    fn evaluate_simple() {
        assert_eq!(
            Polynomial::constant(rat(7, 3))
                .evaluate(&BTreeMap::new())
                .unwrap(),
            rat(7, 3)
        );
        let p = &Polynomial::variable(v(0, vec![0])) * &Polynomial::variable(v(1, vec![0]));
        let mut pt = BTreeMap::new();
        pt.insert(v(0, vec![0]), rat_int(2));
        pt.insert(v(1, vec![0]), rat_int(3));
        assert_eq!(p.evaluate(&pt).unwrap(), rat_int(6));
    }

    #[test]
    fn directional_derivative_linear() {
        // For linear p the derivative is p(dir) independent of base.
        let p = &Polynomial::variable(v(0, vec![0])).scale(&rat_int(3))
            + &Polynomial::variable(v(1, vec![0]));
        let mut base = BTreeMap::new();
        base.insert(v(0, vec![0]), rat_int(11));
        base.insert(v(1, vec![0]), rat_int(-4));
        let mut dir = BTreeMap::new();
        dir.insert(v(0, vec![0]), rat_int(1));
        dir.insert(v(1, vec![0]), rat_int(2));
        assert_eq!(
            p.directional_derivative_at(&base, &dir).unwrap(),
            rat_int(5)
        );
    }

    #[test]
    fn directional_derivative_square() {
        // p = x^2, base a, direction b: derivative 2ab.
        let x = v(0, vec![0]);
        let p = Polynomial::variable(x.clone()).pow(2);
        let mut base = BTreeMap::new();
        base.insert(x.clone(), rat_int(5));
        let mut dir = BTreeMap::new();
        dir.insert(x, rat_int(3));
        assert_eq!(
            p.directional_derivative_at(&base, &dir).unwrap(),
            rat_int(30)
        );
    }

    #[test]
    fn partial_derivative_power_rule() {
        let x = v(0, vec![0]);
        let p = Polynomial::variable(x.clone()).pow(3);
        let d = p.partial_derivative(&x);
        assert_eq!(d, Polynomial::variable(x).pow(2).scale(&rat_int(3)));
    }

    #[test]
    fn div_exact_round_trip() {
        let a = &Polynomial::variable(v(0, vec![0])) + &Polynomial::constant(rat_int(1));
        let b = &Polynomial::variable(v(1, vec![0])).pow(2) - &Polynomial::constant(rat(1, 2));
        let prod = &a * &b;
        assert_eq!(prod.div_exact(&a).unwrap(), b);
        assert_eq!(prod.div_exact(&b).unwrap(), a);
        let not_divisor = &a + &Polynomial::constant(rat_int(5));
        assert!(prod.div_exact(&not_divisor).is_none());
    }

    #[test]
    fn json_round_trip_and_canonical_order() {
        let p = &(&Polynomial::variable(v(1, vec![0, 1]))
            * &Polynomial::variable(v(0, vec![1, 0])))
            .scale(&rat(-2, 3))
            + &Polynomial::variable(VarId::dual(2, DegVec(vec![0, 0]))).pow(2);
        let json = p.to_json();
        let q = Polynomial::from_json(&json).unwrap();
        assert_eq!(p, q);
        // byte stability
        assert_eq!(
            serde_json::to_string(&json).unwrap(),
            serde_json::to_string(&q.to_json()).unwrap()
        );
    }
}
