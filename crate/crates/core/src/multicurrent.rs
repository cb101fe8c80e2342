//! The truncated multicurrent algebra `g ⊗ A`.
//!
//! The basis is indexed by pairs `(i, ω)` with `i` a basis index of `g` and
//! `ω` in the staircase; the bracket is
//! `[x ⊗ τ^ω, y ⊗ τ^ν] = [x, y] ⊗ τ^{ω+ν}` when `ω + ν` stays inside the
//! staircase and zero otherwise.  The module also carries the graded
//! bilinear forms `κ_ω`, the Monte-Carlo index estimator, and the
//! regularity tests for forms and elements.

use crate::degree::DegVec;
use crate::lie::{self, LieAlgebra};
use crate::linalg::QMatrix;
use crate::rational::{rat_from_str, rat_to_string, Rational};
use crate::staircase::Staircase;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum McError {
    #[error("coordinate ({0}, {1}) is outside the algebra basis")]
    UnknownCoordinate(usize, DegVec),
    #[error("staircase has no greatest element; {0} is unavailable")]
    NoGreatestElement(&'static str),
    #[error("invalid element JSON: {0}")]
    InvalidJson(String),
}

/// An element `Σ x_ω ⊗ τ^ω` in sparse coordinates.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct MCElement {
    coords: BTreeMap<(usize, DegVec), Rational>,
}

/// A linear form `Σ f_ω ⊗ ε^ω` in sparse coordinates.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct MCForm {
    coords: BTreeMap<(usize, DegVec), Rational>,
}

macro_rules! coord_impls {
    ($ty:ident) => {
        impl $ty {
            pub fn zero() -> Self {
                Self { coords: BTreeMap::new() }
            }

            pub fn from_coords(
                coords: impl IntoIterator<Item = ((usize, DegVec), Rational)>,
            ) -> Self {
                let mut out = Self::zero();
                for (key, val) in coords {
                    out.add_coord(key.0, key.1, val);
                }
                out
            }

            pub fn add_coord(&mut self, basis: usize, deg: DegVec, val: Rational) {
                if val.is_zero() {
                    return;
                }
                let key = (basis, deg);
                let entry = self.coords.entry(key.clone()).or_insert_with(Rational::zero);
                *entry += val;
                if entry.is_zero() {
                    self.coords.remove(&key);
                }
            }

            pub fn get(&self, basis: usize, deg: &DegVec) -> Rational {
                self.coords
                    .get(&(basis, deg.clone()))
                    .cloned()
                    .unwrap_or_else(Rational::zero)
            }

            pub fn iter(&self) -> impl Iterator<Item = (&(usize, DegVec), &Rational)> {
                self.coords.iter()
            }

            pub fn is_zero(&self) -> bool {
                self.coords.is_empty()
            }

            /// The coordinate vector of the degree-`deg` component in `g`.
            pub fn degree_part(&self, dim: usize, deg: &DegVec) -> Vec<Rational> {
                let mut v = vec![Rational::zero(); dim];
                for ((i, d), val) in &self.coords {
                    if d == deg {
                        v[*i] = val.clone();
                    }
                }
                v
            }

            /// Places a `g`-coordinate vector at degree `deg`.
            pub fn insert_degree_part(&mut self, deg: &DegVec, part: &[Rational]) {
                for (i, val) in part.iter().enumerate() {
                    if !val.is_zero() {
                        self.add_coord(i, deg.clone(), val.clone());
                    }
                }
            }

            /// The set of degrees with a nonzero component.
            pub fn support_degrees(&self) -> std::collections::BTreeSet<DegVec> {
                self.coords.keys().map(|(_, d)| d.clone()).collect()
            }

            pub fn scale(&self, c: &Rational) -> Self {
                if c.is_zero() {
                    return Self::zero();
                }
                Self {
                    coords: self.coords.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
                }
            }

            pub fn add(&self, other: &Self) -> Self {
                let mut out = self.clone();
                for ((i, d), v) in &other.coords {
                    out.add_coord(*i, d.clone(), v.clone());
                }
                out
            }

            pub fn sub(&self, other: &Self) -> Self {
                self.add(&other.scale(&-Rational::from_integer(1.into())))
            }

            pub fn to_json(&self) -> serde_json::Value {
                let coords: Vec<serde_json::Value> = self
                    .coords
                    .iter()
                    .map(|((i, d), v)| {
                        serde_json::json!({ "basis": i, "deg": d.0, "value": rat_to_string(v) })
                    })
                    .collect();
                serde_json::json!({ "coords": coords })
            }

            pub fn from_json(value: &serde_json::Value) -> Result<Self, McError> {
                #[derive(Deserialize)]
                #[serde(deny_unknown_fields)]
                struct CoordJson {
                    basis: usize,
                    deg: Vec<i64>,
                    value: String,
                }
                #[derive(Deserialize)]
                #[serde(deny_unknown_fields)]
                struct CoordsJson {
                    coords: Vec<CoordJson>,
                }
                let parsed: CoordsJson = serde_json::from_value(value.clone())
                    .map_err(|e| McError::InvalidJson(e.to_string()))?;
                let mut out = Self::zero();
                for c in parsed.coords {
                    let v = rat_from_str(&c.value).map_err(McError::InvalidJson)?;
                    out.add_coord(c.basis, DegVec(c.deg), v);
                }
                Ok(out)
            }
        }
    };
}

coord_impls!(MCElement);
coord_impls!(MCForm);

#[derive(Clone, Debug)]
pub struct MulticurrentAlgebra {
    base: LieAlgebra,
    staircase: Staircase,
    /// Canonical basis order: (degree, basis index), matching variable order.
    basis: Vec<(usize, DegVec)>,
    slot: BTreeMap<(usize, DegVec), usize>,
    /// Index of the base algebra, fixed at construction (rank hint when
    /// available, otherwise the default Monte-Carlo estimate).
    base_index: usize,
}

impl MulticurrentAlgebra {
    pub fn new(base: LieAlgebra, staircase: Staircase) -> Self {
        let mut basis = Vec::with_capacity(base.dim() * staircase.len());
        for deg in staircase.iter() {
            for i in 0..base.dim() {
                basis.push((i, deg.clone()));
            }
        }
        basis.sort_by(|a, b| (&a.1, a.0).cmp(&(&b.1, b.0)));
        let slot = basis
            .iter()
            .enumerate()
            .map(|(pos, key)| (key.clone(), pos))
            .collect();
        let base_index = base.rank_hint().unwrap_or_else(|| base.index());
        MulticurrentAlgebra {
            base,
            staircase,
            basis,
            slot,
            base_index,
        }
    }

    pub fn base(&self) -> &LieAlgebra {
        &self.base
    }

    pub fn staircase(&self) -> &Staircase {
        &self.staircase
    }

    pub fn ell(&self) -> usize {
        self.staircase.ell()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[(usize, DegVec)] {
        &self.basis
    }

    pub fn slot_of(&self, basis: usize, deg: &DegVec) -> Result<usize, McError> {
        self.slot
            .get(&(basis, deg.clone()))
            .copied()
            .ok_or_else(|| McError::UnknownCoordinate(basis, deg.clone()))
    }

    /// Index of `g`, fixed at construction.
    pub fn base_index(&self) -> usize {
        self.base_index
    }

    /// The expected index of `g ⊗ A`: `χ(g) · dim A`.
    pub fn expected_index(&self) -> usize {
        self.base_index * self.staircase.len()
    }

    /// Truncated bracket, extended bilinearly.
    pub fn bracket(&self, a: &MCElement, b: &MCElement) -> MCElement {
        let mut out = MCElement::zero();
        for ((i, di), vi) in a.iter() {
            for ((j, dj), vj) in b.iter() {
                let deg = di.add(dj);
                if !self.staircase.contains(&deg) {
                    continue;
                }
                let coeff = vi * vj;
                for k in 0..self.base.dim() {
                    let c = self.base.structure_constant(*i, *j, k);
                    if !c.is_zero() {
                        out.add_coord(k, deg.clone(), &coeff * c);
                    }
                }
            }
        }
        out
    }

    pub fn element_to_vec(&self, x: &MCElement) -> Result<Vec<Rational>, McError> {
        let mut v = vec![Rational::zero(); self.dim()];
        for ((i, d), val) in x.iter() {
            v[self.slot_of(*i, d)?] = val.clone();
        }
        Ok(v)
    }

    pub fn element_from_vec(&self, v: &[Rational]) -> MCElement {
        let mut out = MCElement::zero();
        for (pos, val) in v.iter().enumerate() {
            if !val.is_zero() {
                let (i, d) = &self.basis[pos];
                out.add_coord(*i, d.clone(), val.clone());
            }
        }
        out
    }

    /// Matrix of `ad(X)` in the canonical basis.
    pub fn ad_matrix(&self, x: &MCElement) -> QMatrix {
        let mut m = QMatrix::zeros(self.dim(), self.dim());
        for (col, (j, dj)) in self.basis.iter().enumerate() {
            let mut unit = MCElement::zero();
            unit.add_coord(*j, dj.clone(), Rational::from_integer(1.into()));
            let image = self.bracket(x, &unit);
            for ((k, dk), val) in image.iter() {
                m[(self.slot_of(*k, dk).unwrap(), col)] = val.clone();
            }
        }
        m
    }

    /// Basis of the centralizer of `X` in `g ⊗ A`.
    pub fn centralizer(&self, x: &MCElement) -> Vec<MCElement> {
        self.ad_matrix(x)
            .kernel_basis()
            .into_iter()
            .map(|v| self.element_from_vec(&v))
            .collect()
    }

    /// The graded form `κ_ω` on `g ⊗ A` induced by a bilinear form `κ` on
    /// `g`: it pairs the degree-`ν` and degree-`ν′` parts whenever
    /// `ν + ν′ = ω`.
    pub fn kappa_omega(&self, kappa: &QMatrix, omega: &DegVec) -> QMatrix {
        QMatrix::from_fn(self.dim(), self.dim(), |a, b| {
            let (i, di) = &self.basis[a];
            let (j, dj) = &self.basis[b];
            if di.add(dj) == *omega {
                kappa[(*i, *j)].clone()
            } else {
                Rational::zero()
            }
        })
    }

    /// Value of `κ_ω(x, y)`.
    pub fn kappa_omega_pairing(
        &self,
        kappa: &QMatrix,
        omega: &DegVec,
        x: &MCElement,
        y: &MCElement,
    ) -> Rational {
        let mut acc = Rational::zero();
        for ((i, di), vi) in x.iter() {
            for ((j, dj), vj) in y.iter() {
                if di.add(dj) == *omega {
                    acc += vi * vj * kappa[(*i, *j)].clone();
                }
            }
        }
        acc
    }

    /// Kernel dimension of `B_F(a, b) = F([a, b])` over the canonical basis.
    pub fn form_stabilizer_dim(&self, f: &MCForm) -> usize {
        let b = QMatrix::from_fn(self.dim(), self.dim(), |a, c| {
            let (i, di) = &self.basis[a];
            let (j, dj) = &self.basis[c];
            let deg = di.add(dj);
            if !self.staircase.contains(&deg) {
                return Rational::zero();
            }
            (0..self.base.dim())
                .map(|k| self.base.structure_constant(*i, *j, k) * &f.get(k, &deg))
                .sum()
        });
        self.dim() - b.rank()
    }

    /// Monte-Carlo index of `g ⊗ A`, as in [`LieAlgebra::index_sampled`].
    pub fn index_sampled(&self, samples: usize, seed: u64) -> usize {
        assert!(samples >= 1, "index sampling needs at least one form");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best = self.dim();
        for _ in 0..samples {
            let coords = lie::random_int_vector(&mut rng, self.dim());
            let f = MCForm::from_coords(
                coords
                    .into_iter()
                    .enumerate()
                    .map(|(pos, v)| (self.basis[pos].clone(), v)),
            );
            best = best.min(self.form_stabilizer_dim(&f));
        }
        best
    }

    pub fn index(&self) -> usize {
        self.index_sampled(lie::INDEX_SAMPLES, lie::INDEX_SEED)
    }

    /// Whether `F` is a regular form on `g ⊗ A`.
    ///
    /// When the staircase has a greatest element `μ`, the reference value
    /// for the minimal stabilizer dimension is `χ(g)·dim A`, and the result
    /// is cross-checked against regularity of the top component `f_μ` on
    /// `g`; the two criteria agreeing is part of the contract.  Without a
    /// greatest element the comparison value is the Monte-Carlo index.
    pub fn is_regular_form(&self, f: &MCForm) -> bool {
        let stab = self.form_stabilizer_dim(f);
        match self.staircase.greatest_element() {
            Some(mu) => {
                let regular = stab == self.expected_index();
                let f_mu = f.degree_part(self.base.dim(), &mu);
                let top_regular = self.base.form_stabilizer_dim(&f_mu) == self.base_index;
                assert_eq!(
                    regular, top_regular,
                    "regular-form criterion disagrees with the top component"
                );
                regular
            }
            None => stab == self.index(),
        }
    }

    /// Whether `X` is a regular element of `g ⊗ A`.
    ///
    /// Requires a greatest element; the criterion is regularity of the
    /// degree-zero part in `g`, cross-checked against the centralizer
    /// dimension of `X` itself.
    pub fn is_regular_element(&self, x: &MCElement) -> Result<bool, McError> {
        if self.staircase.greatest_element().is_none() {
            return Err(McError::NoGreatestElement("is_regular_element"));
        }
        let x0 = x.degree_part(self.base.dim(), &DegVec::zero(self.ell()));
        let regular = self.base.centralizer(&x0).len() == self.base_index;
        let full = self.centralizer(x).len() == self.expected_index();
        assert_eq!(
            regular, full,
            "element regularity disagrees between degree-zero part and full centralizer"
        );
        Ok(regular)
    }

    /// Centralizer dimension of the degree-zero part, for diagnostics.
    pub fn degree_zero_centralizer_dim(&self, x: &MCElement) -> usize {
        let x0 = x.degree_part(self.base.dim(), &DegVec::zero(self.ell()));
        self.base.centralizer(&x0).len()
    }
}

/// Exact nondegeneracy of a square form matrix.
pub fn is_nondegenerate(form: &QMatrix) -> bool {
    assert_eq!(form.rows(), form.cols(), "form matrix must be square");
    form.rank() == form.rows()
}
