//! Staircase index sets and the degree-set arithmetic built on them.
//!
//! A staircase is a finite downward-closed subset `Ω₁ ⊂ N^ℓ` containing the
//! origin; it lists the monomial exponents that survive in the truncated
//! algebra `A = Q[t_1, …, t_ℓ]/I`.  Downward closure is equivalent to the
//! complement `Ω₀` being stable under addition of `N^ℓ`, i.e. to `I` being
//! an ideal.  The bad-degree sets `Φ_k` and the admissible index sets for
//! degree-`k` invariants are computed here by exact Minkowski arithmetic.

use crate::degree::DegVec;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StaircaseError {
    #[error("staircase must contain the origin")]
    MissingZero,
    #[error("staircase is not downward closed: {below} <= {inside} but {below} is missing")]
    NotDownwardClosed { below: DegVec, inside: DegVec },
    #[error("degree vector {0} has length {1}, expected {2}")]
    LengthMismatch(DegVec, usize, usize),
    #[error("staircase entries must be nonnegative, got {0}")]
    NegativeEntry(DegVec),
    #[error("invalid staircase JSON: {0}")]
    InvalidJson(String),
}

/// A finite set of degree vectors in `Z^ℓ`, with set semantics.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct DegreeSet {
    elements: BTreeSet<DegVec>,
}

impl DegreeSet {
    pub fn new() -> Self {
        DegreeSet {
            elements: BTreeSet::new(),
        }
    }

    /// The singleton `{0}`, the Minkowski unit.
    pub fn zero(ell: usize) -> Self {
        DegreeSet::from_iter([DegVec::zero(ell)])
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, v: &DegVec) -> bool {
        self.elements.contains(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = &DegVec> {
        self.elements.iter()
    }

    pub fn insert(&mut self, v: DegVec) {
        self.elements.insert(v);
    }

    pub fn neg(&self) -> DegreeSet {
        DegreeSet::from_iter(self.elements.iter().map(DegVec::neg))
    }

    pub fn union(&self, other: &DegreeSet) -> DegreeSet {
        DegreeSet::from_iter(self.elements.union(&other.elements).cloned())
    }

    pub fn difference(&self, other: &DegreeSet) -> DegreeSet {
        DegreeSet::from_iter(self.elements.difference(&other.elements).cloned())
    }

    /// Minkowski sum `{a + b}` with deduplication.
    pub fn minkowski_sum(&self, other: &DegreeSet) -> DegreeSet {
        let mut out = BTreeSet::new();
        for a in &self.elements {
            for b in &other.elements {
                out.insert(a.add(b));
            }
        }
        DegreeSet { elements: out }
    }

    /// `k`-fold Minkowski power; the zeroth power is `{0}`.
    pub fn minkowski_pow(&self, k: u32, ell: usize) -> DegreeSet {
        let mut acc = DegreeSet::zero(ell);
        for _ in 0..k {
            acc = acc.minkowski_sum(self);
        }
        acc
    }

    /// Shift by a fixed vector: `{v - a : a ∈ self}` when `sub`, else `{v + a}`.
    pub fn sub_from(&self, v: &DegVec) -> DegreeSet {
        DegreeSet::from_iter(self.elements.iter().map(|a| v.sub(a)))
    }
}

impl FromIterator<DegVec> for DegreeSet {
    fn from_iter<T: IntoIterator<Item = DegVec>>(iter: T) -> Self {
        DegreeSet {
            elements: iter.into_iter().collect(),
        }
    }
}

/// A finite downward-closed exponent set in `N^ℓ` containing the origin.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Staircase {
    ell: usize,
    omega1: BTreeSet<DegVec>,
}

impl Staircase {
    /// The full box `[0, μ_1] × ⋯ × [0, μ_ℓ]`, whose greatest element is `μ`.
    pub fn from_box(mu: &DegVec) -> Self {
        assert!(mu.is_nonneg(), "box corner must be nonnegative");
        let ell = mu.len();
        let mut omega1 = BTreeSet::new();
        let mut cur = vec![0i64; ell];
        loop {
            omega1.insert(DegVec(cur.clone()));
            // odometer increment bounded by mu
            let mut i = 0;
            loop {
                if i == ell {
                    return Staircase { ell, omega1 };
                }
                if cur[i] < mu.0[i] {
                    cur[i] += 1;
                    break;
                }
                cur[i] = 0;
                i += 1;
            }
        }
    }

    /// Validates an explicit exponent set: nonnegative entries of uniform
    /// length, origin present, downward closed (with a witness on failure).
    pub fn validate(
        ell: usize,
        omega1: impl IntoIterator<Item = DegVec>,
    ) -> Result<Self, StaircaseError> {
        let set: BTreeSet<DegVec> = omega1.into_iter().collect();
        for v in &set {
            if v.len() != ell {
                return Err(StaircaseError::LengthMismatch(v.clone(), v.len(), ell));
            }
            if !v.is_nonneg() {
                return Err(StaircaseError::NegativeEntry(v.clone()));
            }
        }
        if !set.contains(&DegVec::zero(ell)) {
            return Err(StaircaseError::MissingZero);
        }
        for v in &set {
            for below in lattice_points_below(v) {
                if !set.contains(&below) {
                    return Err(StaircaseError::NotDownwardClosed {
                        below,
                        inside: v.clone(),
                    });
                }
            }
        }
        Ok(Staircase { ell, omega1: set })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn len(&self) -> usize {
        self.omega1.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a valid staircase always contains the origin
    }

    pub fn contains(&self, v: &DegVec) -> bool {
        self.omega1.contains(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = &DegVec> {
        self.omega1.iter()
    }

    pub fn degrees(&self) -> DegreeSet {
        DegreeSet::from_iter(self.omega1.iter().cloned())
    }

    /// The greatest element `μ` when one exists (iff the componentwise
    /// maximum itself belongs to the staircase).
    pub fn greatest_element(&self) -> Option<DegVec> {
        let mut max = DegVec::zero(self.ell);
        for v in &self.omega1 {
            for i in 0..self.ell {
                max.0[i] = max.0[i].max(v.0[i]);
            }
        }
        self.omega1.contains(&max).then_some(max)
    }

    /// The set `Φ_k = ⋃_{j=1}^{k} (((Ω₁ − Ω₁) ∖ (−Ω₁))^j + (−Ω₁)^{k−j})`
    /// of degrees where degree-`k` invariance can fail.
    pub fn phi_k(&self, k: u32) -> DegreeSet {
        assert!(k >= 1, "phi_k requires k >= 1");
        let omega1 = self.degrees();
        let neg = omega1.neg();
        let diff = omega1.minkowski_sum(&neg); // Ω₁ − Ω₁
        let bad = diff.difference(&neg); // (Ω₁ − Ω₁) ∖ (−Ω₁)
        let mut out = DegreeSet::new();
        for j in 1..=k {
            let part = bad
                .minkowski_pow(j, self.ell)
                .minkowski_sum(&neg.minkowski_pow(k - j, self.ell));
            out = out.union(&part);
        }
        out
    }

    /// Indices of guaranteed-invariant degree-`k` components:
    /// `Ω₁^k ∖ (−Φ_k)`.  For a box with corner `μ` this equals `kμ − Ω₁`.
    pub fn admissible_gammas(&self, k: u32) -> DegreeSet {
        assert!(k >= 1, "admissible_gammas requires k >= 1");
        let support = self.degrees().minkowski_pow(k, self.ell);
        support.difference(&self.phi_k(k).neg())
    }

    pub fn to_json(&self) -> serde_json::Value {
        // A downward-closed set with a greatest element is exactly a box.
        match self.greatest_element() {
            Some(mu) => serde_json::json!({ "ell": self.ell, "box": mu.0 }),
            None => serde_json::json!({
                "ell": self.ell,
                "omega1": self.omega1.iter().map(|v| v.0.clone()).collect::<Vec<_>>(),
            }),
        }
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, StaircaseError> {
        let spec: StaircaseJson = serde_json::from_value(value.clone())
            .map_err(|e| StaircaseError::InvalidJson(e.to_string()))?;
        spec.build()
    }
}

/// Wire format: `{"ell": ℓ, "box": [μ…]}` or `{"ell": ℓ, "omega1": [[…],…]}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaircaseJson {
    pub ell: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r#box: Option<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega1: Option<Vec<Vec<i64>>>,
}

impl StaircaseJson {
    pub fn build(&self) -> Result<Staircase, StaircaseError> {
        match (&self.r#box, &self.omega1) {
            (Some(mu), None) => {
                let mu = DegVec(mu.clone());
                if mu.len() != self.ell {
                    return Err(StaircaseError::LengthMismatch(
                        mu.clone(),
                        mu.len(),
                        self.ell,
                    ));
                }
                if !mu.is_nonneg() {
                    return Err(StaircaseError::NegativeEntry(mu));
                }
                Ok(Staircase::from_box(&mu))
            }
            (None, Some(vs)) => Staircase::validate(self.ell, vs.iter().map(|v| DegVec(v.clone()))),
            _ => Err(StaircaseError::InvalidJson(
                "exactly one of \"box\" or \"omega1\" must be given".into(),
            )),
        }
    }
}

/// Immediate predecessors `v − e_i`; downward closure is transitive, so
/// validation only needs these.
fn lattice_points_below(v: &DegVec) -> Vec<DegVec> {
    let mut out = Vec::new();
    for i in 0..v.len() {
        if v.0[i] > 0 {
            let mut w = v.clone();
            w.0[i] -= 1;
            out.push(w);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(v: &[i64]) -> DegVec {
        DegVec(v.to_vec())
    }

    #[test]
    fn box_enumeration() {
        let s = Staircase::from_box(&d(&[0]));
        assert_eq!(s.len(), 1);
        assert!(s.contains(&d(&[0])));

        let s = Staircase::from_box(&d(&[1]));
        assert_eq!(s.len(), 2);

        let s = Staircase::from_box(&d(&[1, 1]));
        assert_eq!(s.len(), 4);
        for v in [[0, 0], [1, 0], [0, 1], [1, 1]] {
            assert!(s.contains(&d(&v)));
        }
    }

    #[test]
    fn validate_accepts_and_rejects() {
        let ok = Staircase::validate(2, [d(&[0, 0]), d(&[1, 0]), d(&[0, 1])]).unwrap();
        assert_eq!(ok.greatest_element(), None);

        let err = Staircase::validate(1, [d(&[0]), d(&[2])]).unwrap_err();
        assert_eq!(
            err,
            StaircaseError::NotDownwardClosed {
                below: d(&[1]),
                inside: d(&[2])
            }
        );

        assert_eq!(
            Staircase::validate(1, []).unwrap_err(),
            StaircaseError::MissingZero
        );
    }

    #[test]
    fn greatest_element_cases() {
        assert_eq!(
            Staircase::from_box(&d(&[2, 3])).greatest_element(),
            Some(d(&[2, 3]))
        );
        assert_eq!(
            Staircase::validate(1, [d(&[0]), d(&[1]), d(&[2])])
                .unwrap()
                .greatest_element(),
            Some(d(&[2]))
        );
    }

    #[test]
    fn phi_k_interval() {
        // ℓ=1, Ω₁={0,1}: (Ω₁−Ω₁)∖(−Ω₁) = {1}; Φ₂ = ({1}+{−1,0}) ∪ {2}.
        let s = Staircase::from_box(&d(&[1]));
        let phi2 = s.phi_k(2);
        let expected = DegreeSet::from_iter([d(&[0]), d(&[1]), d(&[2])]);
        assert_eq!(phi2, expected);
    }

    #[test]
    fn phi_k_trivial_algebra() {
        let s = Staircase::from_box(&d(&[0]));
        assert!(s.phi_k(1).is_empty());
    }

    #[test]
    fn admissible_gammas_box_formula() {
        let s = Staircase::from_box(&d(&[1]));
        let got = s.admissible_gammas(2);
        assert_eq!(got, DegreeSet::from_iter([d(&[1]), d(&[2])]));
        // equals 2μ − Ω₁
        assert_eq!(got, s.degrees().sub_from(&d(&[2])));

        let s0 = Staircase::from_box(&d(&[0]));
        assert_eq!(s0.admissible_gammas(3), DegreeSet::from_iter([d(&[0])]));
    }

    #[test]
    fn json_round_trip() {
        let s = Staircase::from_box(&d(&[1, 2]));
        let t = Staircase::from_json(&s.to_json()).unwrap();
        assert_eq!(s, t);

        let ns = Staircase::validate(2, [d(&[0, 0]), d(&[1, 0]), d(&[0, 1])]).unwrap();
        let t = Staircase::from_json(&ns.to_json()).unwrap();
        assert_eq!(ns, t);

        let bad = serde_json::json!({"ell": 1, "box": [1], "omega1": [[0]]});
        assert!(Staircase::from_json(&bad).is_err());
    }
}
