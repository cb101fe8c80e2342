//! The principal slice and the orbit-reduction algorithm.
//!
//! For `g = sl_n` with its canonical principal sl2-triple, the slice
//! `x₊ + g^{x₋}` meets every regular adjoint orbit exactly once.  The
//! generators of the invariant ring are normalized so that they restrict
//! to the coordinate functions on the slice; this normalization is solved
//! for symbolically and verified as an exact polynomial identity, never
//! hard-coded.  Over a staircase the slice becomes
//! `x₊ ⊗ 1 + g^{x₋} ⊗ A`, and every regular element of `g ⊗ A` is
//! conjugated onto it by an explicit, logged sequence of one base-change
//! conjugation and nilpotent exponentials.

use crate::degree::DegVec;
use crate::invariants::{InvariantError, InvariantFamily};
use crate::lie::{LieAlgebra, LieError, Sl2Triple};
use crate::linalg::QMatrix;
use crate::multicurrent::{MCElement, McError, MulticurrentAlgebra};
use crate::poly::{PolyError, Polynomial, VarId};
use crate::rational::{rat_from_str, rat_to_string, Rational};
use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use std::collections::BTreeMap;
use thiserror::Error;

/// Attempt budget for the cyclic-vector search (basis scan, then seeded
/// random vectors).
pub const CYCLIC_VECTOR_BUDGET: usize = 50;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SliceError {
    #[error("slice normalization unsolvable: {0}")]
    NormalizationUnsolvable(String),
    #[error(
        "element is not regular: degree-zero centralizer dimension {centralizer_dim} exceeds index {index}"
    )]
    NotRegular {
        centralizer_dim: usize,
        index: usize,
    },
    #[error("cyclic-vector search exhausted its budget of {0} attempts")]
    CyclicVectorBudget(usize),
    #[error("element does not lie in the slice at degree {0}")]
    NotInSlice(DegVec),
    #[error("slice coordinates of the reduced element disagree with the invariant values at generator {j}, degree {omega}")]
    UniquenessMismatch { j: usize, omega: DegVec },
    #[error("transversality fails: rank {rank}, expected {expected}")]
    TransversalityDeficient { rank: usize, expected: usize },
    #[error("internal decomposition solve failed; the degree-zero part is not a slice point")]
    DecompositionFailed,
    #[error("invalid reduction log JSON: {0}")]
    InvalidJson(String),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Mc(#[from] McError),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// The slice `x₊ + g^{x₋}` of `sl_n`, together with the Kostant-normalized
/// generators of the invariant ring.
#[derive(Clone, Debug)]
pub struct PrincipalSlice {
    pub triple: Sl2Triple,
    /// Basis of `g^{x₋}`; `u_j` has ad-`h` weight `−2j` (1-based `j`).
    pub u: Vec<Vec<Rational>>,
    /// Normalized generators in dual coordinates; `generators[j-1]` is
    /// homogeneous of degree `j + 1` and restricts on the slice to the
    /// `j`-th coordinate.
    pub generators: Vec<Polynomial>,
    pub degrees: Vec<u32>,
    ell: usize,
}

impl PrincipalSlice {
    pub fn rank(&self) -> usize {
        self.u.len()
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Coordinates of the slice point `x₊ + Σ c_j u_j`.
    pub fn point(&self, c: &[Rational]) -> Vec<Rational> {
        assert_eq!(
            c.len(),
            self.u.len(),
            "need one coordinate per basis vector"
        );
        let mut out = self.triple.x_plus.clone();
        for (cj, uj) in c.iter().zip(&self.u) {
            for (slot, val) in out.iter_mut().zip(uj) {
                *slot += cj * val;
            }
        }
        out
    }

    /// The formal slice coordinate `c_j` (1-based), as a variable.
    pub fn coordinate_var(&self, j: usize) -> VarId {
        VarId::primal(j - 1, DegVec::zero(self.ell))
    }

    /// Restriction of a polynomial in dual coordinates to the slice: the
    /// variables are evaluated along `x₊ + Σ c_j u_j` with formal `c_j`.
    pub fn restrict(&self, p: &Polynomial) -> Result<Polynomial, SliceError> {
        let zero = DegVec::zero(self.ell);
        let sigma: BTreeMap<VarId, Polynomial> = p
            .variables()
            .into_iter()
            .map(|v| {
                let m = v.basis;
                let mut image = Polynomial::constant(self.triple.x_plus[m].clone());
                for (j, uj) in self.u.iter().enumerate() {
                    if !uj[m].is_zero() {
                        image = &image
                            + &Polynomial::variable(VarId::primal(j, zero.clone())).scale(&uj[m]);
                    }
                }
                (v, image)
            })
            .collect();
        Ok(p.substitute(&sigma)?)
    }
}

/// Builds the slice for `sl_n`: the centralizer basis is taken as the
/// matrix powers of `x₋` (verified against the exact kernel of `ad x₋`),
/// and the generators are solved for as the combination of characteristic
/// coefficients restricting to each coordinate function.
pub fn build_slice(g: &LieAlgebra, ell: usize) -> Result<PrincipalSlice, SliceError> {
    let n = g.sl_n().ok_or(LieError::UnsupportedAlgebra)?;
    let r = n - 1;
    let triple = g.principal_sl2_triple()?;

    // u_j = x₋^j, checked to span the exact kernel of ad(x₋)
    let xm_mat = g.matrix_of(&triple.x_minus)?;
    let mut u = Vec::with_capacity(r);
    let mut power = QMatrix::identity(n);
    for _ in 1..=r {
        power = power.matmul(&xm_mat);
        u.push(g.coords_of(&power)?);
    }
    let kernel = g.centralizer(&triple.x_minus);
    if kernel.len() != r {
        return Err(SliceError::NormalizationUnsolvable(format!(
            "centralizer of x- has dimension {}, expected {r}",
            kernel.len()
        )));
    }
    let span_check = QMatrix::from_rows(u.clone());
    if span_check.rank() != r {
        return Err(SliceError::NormalizationUnsolvable(
            "powers of x- do not span the centralizer".into(),
        ));
    }
    for uj in &u {
        if !g
            .bracket(&triple.x_minus, uj)?
            .iter()
            .all(Rational::is_zero)
        {
            return Err(SliceError::NormalizationUnsolvable(
                "candidate basis vector does not centralize x-".into(),
            ));
        }
    }

    let char_coeffs = g.char_coefficient_invariants(ell)?; // e_2, …, e_n
    let mut slice = PrincipalSlice {
        triple,
        u,
        generators: Vec::with_capacity(r),
        degrees: (1..=r).map(|j| (j + 1) as u32).collect(),
        ell,
    };

    for j in 1..=r {
        let k = (j + 1) as u32;
        // candidate invariants of degree k: products of characteristic
        // coefficients with total degree k
        let candidates: Vec<Polynomial> = partitions_min2(k, n as u32)
            .into_iter()
            .map(|parts| {
                parts
                    .iter()
                    .map(|&part| &char_coeffs[(part - 2) as usize])
                    .fold(Polynomial::one(), |acc, e| &acc * e)
            })
            .collect();
        let restricted: Vec<Polynomial> = candidates
            .iter()
            .map(|cand| slice.restrict(cand))
            .collect::<Result<_, _>>()?;

        // linear system: Σ α_m restricted[m] = c_j over the occurring monomials
        let mut monomials = std::collections::BTreeSet::new();
        for rp in &restricted {
            for (m, _) in rp.terms() {
                monomials.insert(m.clone());
            }
        }
        let target = Polynomial::variable(slice.coordinate_var(j));
        for (m, _) in target.terms() {
            monomials.insert(m.clone());
        }
        let monomials: Vec<_> = monomials.into_iter().collect();
        let a = QMatrix::from_fn(monomials.len(), restricted.len(), |row, col| {
            restricted[col].coefficient(&monomials[row])
        });
        let rhs: Vec<Rational> = monomials.iter().map(|m| target.coefficient(m)).collect();
        let alpha = a.solve(&rhs).ok_or_else(|| {
            SliceError::NormalizationUnsolvable(format!(
                "no combination of characteristic coefficients restricts to coordinate {j}"
            ))
        })?;

        let gen = candidates
            .iter()
            .zip(&alpha)
            .fold(Polynomial::zero(), |acc, (cand, a)| &acc + &cand.scale(a));
        // symbolic verification of the normalization identity
        if slice.restrict(&gen)? != target {
            return Err(SliceError::NormalizationUnsolvable(format!(
                "normalization identity fails symbolically for generator {j}"
            )));
        }
        if gen.homogeneous_degree() != Some(k) {
            return Err(SliceError::NormalizationUnsolvable(format!(
                "generator {j} is not homogeneous of degree {k}"
            )));
        }
        slice.generators.push(gen);
    }
    Ok(slice)
}

/// Descending partitions of `total` into parts between 2 and `max_part`.
fn partitions_min2(total: u32, max_part: u32) -> Vec<Vec<u32>> {
    fn go(total: u32, max_part: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if total == 0 {
            out.push(prefix.clone());
            return;
        }
        let mut part = max_part.min(total);
        while part >= 2 {
            if total == part || total >= part + 2 {
                prefix.push(part);
                go(total - part, part, prefix, out);
                prefix.pop();
            }
            part -= 1;
        }
    }
    let mut out = Vec::new();
    go(total, max_part, &mut Vec::new(), &mut out);
    out
}

/// One conjugation applied during orbit reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReductionStep {
    /// Simultaneous base change `x_ω ↦ S x_ω S⁻¹` on every component.
    BaseConjugation { matrix: QMatrix },
    /// `exp(ad(z ⊗ τ^ν))` for `ν > 0`; nilpotent, so the sum is finite.
    ExpAd { z: Vec<Rational>, nu: DegVec },
}

impl ReductionStep {
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            ReductionStep::BaseConjugation { matrix } => {
                let rows: Vec<Vec<String>> = (0..matrix.rows())
                    .map(|i| matrix.row(i).iter().map(rat_to_string).collect())
                    .collect();
                serde_json::json!({ "type": "base_conjugation", "matrix": rows })
            }
            ReductionStep::ExpAd { z, nu } => serde_json::json!({
                "type": "exp_ad",
                "z": z.iter().map(rat_to_string).collect::<Vec<_>>(),
                "nu": nu.0,
            }),
        }
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, SliceError> {
        #[derive(Deserialize)]
        #[serde(tag = "type")]
        enum StepJson {
            #[serde(rename = "base_conjugation")]
            Base { matrix: Vec<Vec<String>> },
            #[serde(rename = "exp_ad")]
            Exp { z: Vec<String>, nu: Vec<i64> },
        }
        let step: StepJson = serde_json::from_value(value.clone())
            .map_err(|e| SliceError::InvalidJson(e.to_string()))?;
        match step {
            StepJson::Base { matrix } => {
                let rows: Result<Vec<Vec<Rational>>, _> = matrix
                    .into_iter()
                    .map(|row| row.iter().map(|s| rat_from_str(s)).collect())
                    .collect();
                Ok(ReductionStep::BaseConjugation {
                    matrix: QMatrix::from_rows(rows.map_err(SliceError::InvalidJson)?),
                })
            }
            StepJson::Exp { z, nu } => Ok(ReductionStep::ExpAd {
                z: z.iter()
                    .map(|s| rat_from_str(s))
                    .collect::<Result<_, _>>()
                    .map_err(SliceError::InvalidJson)?,
                nu: DegVec(nu),
            }),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ReductionResult {
    pub output: MCElement,
    pub log: Vec<ReductionStep>,
}

/// The slice `x₊ ⊗ 1 + g^{x₋} ⊗ A` inside a multicurrent algebra.
pub struct TruncatedSlice<'a> {
    pub slice: &'a PrincipalSlice,
    pub mca: &'a MulticurrentAlgebra,
}

impl<'a> TruncatedSlice<'a> {
    pub fn new(slice: &'a PrincipalSlice, mca: &'a MulticurrentAlgebra) -> Self {
        assert_eq!(slice.ell(), mca.ell(), "staircase length mismatch");
        assert_eq!(
            slice.triple.x_plus.len(),
            mca.base().dim(),
            "slice and algebra dimensions disagree"
        );
        TruncatedSlice { slice, mca }
    }

    pub fn rank(&self) -> usize {
        self.slice.rank()
    }

    /// The coordinate variable `ε_{i,ω}` (1-based `i`).
    pub fn epsilon_var(&self, i: usize, omega: &DegVec) -> VarId {
        VarId::dual(i - 1, omega.clone())
    }

    /// The basis element `U_{i,ω} = u_i ⊗ τ^ω` (1-based `i`).
    pub fn u_element(&self, i: usize, omega: &DegVec) -> MCElement {
        let mut e = MCElement::zero();
        e.insert_degree_part(omega, &self.slice.u[i - 1]);
        e
    }

    /// The slice point with the given `ε` coordinates.
    pub fn point_from_epsilon(&self, eps: &BTreeMap<(usize, DegVec), Rational>) -> MCElement {
        let mut x = MCElement::zero();
        x.insert_degree_part(&DegVec::zero(self.mca.ell()), &self.slice.triple.x_plus);
        for ((i, omega), val) in eps {
            let scaled: Vec<Rational> = self.slice.u[*i - 1].iter().map(|a| a * val).collect();
            x.insert_degree_part(omega, &scaled);
        }
        x
    }

    /// The `ε` coordinates of an element of the slice; fails with the
    /// offending degree when the element is not in the slice.
    pub fn epsilon_coords(
        &self,
        x: &MCElement,
    ) -> Result<BTreeMap<(usize, DegVec), Rational>, SliceError> {
        let dim = self.mca.base().dim();
        let zero = DegVec::zero(self.mca.ell());
        let u_matrix =
            QMatrix::from_fn(dim, self.rank(), |row, col| self.slice.u[col][row].clone());
        let mut out = BTreeMap::new();
        for omega in self.mca.staircase().iter() {
            let mut part = x.degree_part(dim, omega);
            if *omega == zero {
                for (slot, xp) in part.iter_mut().zip(&self.slice.triple.x_plus) {
                    *slot -= xp;
                }
            }
            let alpha = u_matrix
                .solve(&part)
                .ok_or_else(|| SliceError::NotInSlice(omega.clone()))?;
            for (i, val) in alpha.into_iter().enumerate() {
                if !val.is_zero() {
                    out.insert((i + 1, omega.clone()), val);
                }
            }
        }
        Ok(out)
    }

    pub fn contains(&self, x: &MCElement) -> bool {
        self.epsilon_coords(x).is_ok()
    }

    /// Restriction `S((g⊗A)*) → F[𝔱]`: substitutes the slice
    /// parametrization into a polynomial in dual coordinates, yielding a
    /// polynomial in the `ε_{i,ω}`.
    pub fn restrict(&self, p: &Polynomial) -> Result<Polynomial, SliceError> {
        let zero = DegVec::zero(self.mca.ell());
        let sigma: BTreeMap<VarId, Polynomial> = p
            .variables()
            .into_iter()
            .map(|v| {
                let m = v.basis;
                let mut image = if v.degree == zero {
                    Polynomial::constant(self.slice.triple.x_plus[m].clone())
                } else {
                    Polynomial::zero()
                };
                for (idx, uj) in self.slice.u.iter().enumerate() {
                    if !uj[m].is_zero() {
                        image = &image
                            + &Polynomial::variable(self.epsilon_var(idx + 1, &v.degree))
                                .scale(&uj[m]);
                    }
                }
                (v, image)
            })
            .collect();
        Ok(p.substitute(&sigma)?)
    }

    /// Evaluation point sending each dual variable to the coordinate of `x`.
    pub fn evaluation_point(&self, x: &MCElement) -> BTreeMap<VarId, Rational> {
        let dim = self.mca.base().dim();
        let mut point = BTreeMap::new();
        for omega in self.mca.staircase().iter() {
            let part = x.degree_part(dim, omega);
            for (m, val) in part.into_iter().enumerate() {
                point.insert(VarId::dual(m, omega.clone()), val);
            }
        }
        point
    }

    /// The directional derivative of the family component `p^{(j)}_ω` at
    /// `X` in the direction `U_{i,λ}`.
    pub fn derivative_pairing(
        &self,
        families: &[InvariantFamily],
        j: usize,
        omega: &DegVec,
        i: usize,
        lambda: &DegVec,
        x: &MCElement,
    ) -> Result<Rational, SliceError> {
        let family = &families[j - 1];
        let component = family
            .components
            .get(omega)
            .ok_or_else(|| SliceError::NotInSlice(omega.clone()))?;
        let base = self.evaluation_point(x);
        let dir = self.evaluation_point(&self.u_element(i, lambda));
        Ok(component.directional_derivative_at(&base, &dir)?)
    }

    /// `exp(ad(z ⊗ τ^ν))` applied to `x`; `ν > 0` makes the series finite.
    pub fn exp_ad(&self, z: &[Rational], nu: &DegVec, x: &MCElement) -> MCElement {
        assert!(nu.is_positive(), "exp_ad needs a positive degree");
        let mut z_el = MCElement::zero();
        z_el.insert_degree_part(nu, z);
        let mut out = x.clone();
        let mut term = x.clone();
        let mut m: i64 = 1;
        loop {
            term = self
                .mca
                .bracket(&z_el, &term)
                .scale(&(Rational::one() / Rational::from_integer(m.into())));
            if term.is_zero() {
                break;
            }
            out = out.add(&term);
            m += 1;
        }
        out
    }

    /// Replays a reduction log.
    pub fn apply_log(&self, x: &MCElement, log: &[ReductionStep]) -> Result<MCElement, SliceError> {
        let mut cur = x.clone();
        for step in log {
            match step {
                ReductionStep::BaseConjugation { matrix } => {
                    cur = self.conjugate_all_degrees(&cur, matrix)?;
                }
                ReductionStep::ExpAd { z, nu } => {
                    cur = self.exp_ad(z, nu, &cur);
                }
            }
        }
        Ok(cur)
    }

    fn conjugate_all_degrees(&self, x: &MCElement, s: &QMatrix) -> Result<MCElement, SliceError> {
        let g = self.mca.base();
        let dim = g.dim();
        let s_inv = s.inverse().ok_or(SliceError::DecompositionFailed)?;
        let mut out = MCElement::zero();
        for omega in x.support_degrees() {
            let part = x.degree_part(dim, &omega);
            let mat = g.matrix_of(&part)?;
            let conj = s.matmul(&mat).matmul(&s_inv);
            out.insert_degree_part(&omega, &g.coords_of(&conj)?);
        }
        Ok(out)
    }

    /// Conjugates a regular element onto the slice.
    ///
    /// Stage 1 moves the degree-zero part onto `x₊ + g^{x₋}` by a single
    /// base change built from two Krylov bases: the target slice point is
    /// the one whose coordinates are the invariant values of the input.
    /// Stage 2 walks the positive staircase degrees in lexicographic order
    /// (a linear extension of the partial order, so minimal uncleaned
    /// degrees come first) and clears each component into `g^{x₋}` with a
    /// nilpotent exponential; degrees not above the current one are never
    /// touched again.
    pub fn reduce_to_slice(&self, x: &MCElement) -> Result<ReductionResult, SliceError> {
        let g = self.mca.base();
        let dim = g.dim();
        let ell = self.mca.ell();
        let zero = DegVec::zero(ell);

        if !self.mca.is_regular_element(x)? {
            return Err(SliceError::NotRegular {
                centralizer_dim: self.mca.degree_zero_centralizer_dim(x),
                index: self.mca.base_index(),
            });
        }

        let mut log = Vec::new();
        let mut cur = x.clone();

        // stage 1: bring the degree-zero part onto the slice
        let x0 = cur.degree_part(dim, &zero);
        if !self.in_slice0(&x0) {
            let s = self.stage1_conjugation(&x0)?;
            cur = self.conjugate_all_degrees(&cur, &s)?;
            debug_assert!(self.in_slice0(&cur.degree_part(dim, &zero)));
            log.push(ReductionStep::BaseConjugation { matrix: s });
        }

        // stage 2: clear positive degrees in lexicographic order
        let x0 = cur.degree_part(dim, &zero);
        let ad0_cols: Vec<Vec<Rational>> = (0..dim)
            .map(|t| g.bracket(&crate::lie::basis_vector(dim, t), &x0).unwrap())
            .collect();
        for nu in self.mca.staircase().iter() {
            if !nu.is_positive() {
                continue;
            }
            let part = cur.degree_part(dim, nu);
            if self.in_centralizer_span(&part) {
                continue;
            }
            // solve  [z, x0] − Σ β_i u_i = −x_ν  for z
            let r = self.rank();
            let a = QMatrix::from_fn(dim, dim + r, |row, col| {
                if col < dim {
                    ad0_cols[col][row].clone()
                } else {
                    -self.slice.u[col - dim][row].clone()
                }
            });
            let rhs: Vec<Rational> = part.iter().map(|v| -v.clone()).collect();
            let sol = a.solve(&rhs).ok_or(SliceError::DecompositionFailed)?;
            let z = sol[..dim].to_vec();
            cur = self.exp_ad(&z, nu, &cur);
            debug_assert!(self.in_centralizer_span(&cur.degree_part(dim, nu)));
            log.push(ReductionStep::ExpAd { z, nu: nu.clone() });
        }

        self.epsilon_coords(&cur)?; // the output must lie in the slice
        Ok(ReductionResult { output: cur, log })
    }

    fn in_slice0(&self, x0: &[Rational]) -> bool {
        let mut shifted = x0.to_vec();
        for (slot, xp) in shifted.iter_mut().zip(&self.slice.triple.x_plus) {
            *slot -= xp;
        }
        self.in_centralizer_span(&shifted)
    }

    fn in_centralizer_span(&self, v: &[Rational]) -> bool {
        let u_matrix = QMatrix::from_fn(v.len(), self.rank(), |row, col| {
            self.slice.u[col][row].clone()
        });
        u_matrix.solve(v).is_some()
    }

    /// The base change taking the degree-zero part to its slice
    /// representative: maps the Krylov basis of a cyclic vector for `x₀`
    /// onto the Krylov basis of `e_n` for the target point, which shares
    /// its characteristic polynomial.
    fn stage1_conjugation(&self, x0: &[Rational]) -> Result<QMatrix, SliceError> {
        let g = self.mca.base();
        let m = g.matrix_of(x0)?;
        let n = m.rows();
        let v = find_cyclic_vector(&m)?;

        // invariant values of x0 give the target slice coordinates
        let zero = DegVec::zero(self.slice.ell());
        let point: BTreeMap<VarId, Rational> = x0
            .iter()
            .enumerate()
            .map(|(i, val)| (VarId::dual(i, zero.clone()), val.clone()))
            .collect();
        let c: Vec<Rational> = self
            .slice
            .generators
            .iter()
            .map(|p| p.evaluate(&point))
            .collect::<Result<_, _>>()?;
        let target = g.matrix_of(&self.slice.point(&c))?;

        let mut e_n = vec![Rational::zero(); n];
        e_n[n - 1] = Rational::one();
        let k_m = krylov_matrix(&m, &v);
        let k_t = krylov_matrix(&target, &e_n);
        let s = k_t.matmul(&k_m.inverse().ok_or(SliceError::DecompositionFailed)?);
        Ok(s)
    }

    /// Transversality at a slice point: the centralizer block together
    /// with the bracket image `[g ⊗ A, X]` must span the whole algebra.
    pub fn transversality(&self, x: &MCElement) -> Result<usize, SliceError> {
        self.epsilon_coords(x)?; // must be a slice point
        let dim_total = self.mca.dim();
        let mut rows: Vec<Vec<Rational>> = Vec::new();
        for omega in self.mca.staircase().iter() {
            for i in 1..=self.rank() {
                rows.push(self.mca.element_to_vec(&self.u_element(i, omega))?);
            }
        }
        for (j, dj) in self.mca.basis() {
            let mut unit = MCElement::zero();
            unit.add_coord(*j, dj.clone(), Rational::one());
            rows.push(self.mca.element_to_vec(&self.mca.bracket(&unit, x))?);
        }
        let rank = QMatrix::from_rows(rows).rank();
        if rank != dim_total {
            return Err(SliceError::TransversalityDeficient {
                rank,
                expected: dim_total,
            });
        }
        Ok(rank)
    }

    /// Checks that the slice coordinates of the reduced element equal the
    /// invariant values of the original element, for every generator and
    /// staircase degree.
    pub fn verify_uniqueness(
        &self,
        original: &MCElement,
        reduced: &MCElement,
        dual_families: &[InvariantFamily],
    ) -> Result<(), SliceError> {
        let eps = self.epsilon_coords(reduced)?;
        let point = self.evaluation_point(original);
        for (j, family) in dual_families.iter().enumerate() {
            let j = j + 1;
            for omega in self.mca.staircase().iter() {
                let expected = family
                    .components
                    .get(omega)
                    .map(|p| p.evaluate(&point))
                    .transpose()?
                    .unwrap_or_else(Rational::zero);
                let got = eps
                    .get(&(j, omega.clone()))
                    .cloned()
                    .unwrap_or_else(Rational::zero);
                if expected != got {
                    return Err(SliceError::UniquenessMismatch {
                        j,
                        omega: omega.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

fn krylov_matrix(m: &QMatrix, v: &[Rational]) -> QMatrix {
    let n = m.rows();
    let mut cols = Vec::with_capacity(n);
    let mut cur = v.to_vec();
    for _ in 0..n {
        cols.push(cur.clone());
        cur = m.matvec(&cur);
    }
    QMatrix::from_fn(n, n, |i, j| cols[j][i].clone())
}

/// Scans the standard basis, then seeded random integer vectors, for a
/// cyclic vector of `m`.
fn find_cyclic_vector(m: &QMatrix) -> Result<Vec<Rational>, SliceError> {
    let n = m.rows();
    let mut attempts = 0;
    for i in 0..n {
        if attempts >= CYCLIC_VECTOR_BUDGET {
            break;
        }
        attempts += 1;
        let mut v = vec![Rational::zero(); n];
        v[i] = Rational::one();
        if krylov_matrix(m, &v).rank() == n {
            return Ok(v);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    while attempts < CYCLIC_VECTOR_BUDGET {
        attempts += 1;
        let v: Vec<Rational> = (0..n)
            .map(|_| Rational::from_integer(rng.gen_range(-20i64..=20).into()))
            .collect();
        if krylov_matrix(m, &v).rank() == n {
            return Ok(v);
        }
    }
    Err(SliceError::CyclicVectorBudget(CYCLIC_VECTOR_BUDGET))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::InvariantFamily;
    use crate::lie::{sl_e_index, sl_h_index};
    use crate::rational::{rat, rat_int};
    use crate::staircase::Staircase;

    fn slice_for(n: usize, ell: usize) -> (LieAlgebra, PrincipalSlice) {
        let g = LieAlgebra::sl_n_chevalley(n).unwrap();
        let s = build_slice(&g, ell).unwrap();
        (g, s)
    }

    #[test]
    fn sl2_slice_and_golden_generator() {
        let (_, s) = slice_for(2, 1);
        assert_eq!(s.rank(), 1);
        // u_1 = x- exactly
        assert_eq!(s.u[0], s.triple.x_minus);
        // p(1) = (h*)² + x-* x+*, the normalized quadratic invariant
        let (xp, xm, h) = (sl_e_index(2, 1, 2), sl_e_index(2, 2, 1), sl_h_index(2, 1));
        let hv = Polynomial::variable(VarId::dual(h, DegVec(vec![0])));
        let xpv = Polynomial::variable(VarId::dual(xp, DegVec(vec![0])));
        let xmv = Polynomial::variable(VarId::dual(xm, DegVec(vec![0])));
        let expected = &hv.pow(2) + &(&xmv * &xpv);
        assert_eq!(s.generators[0], expected);
    }

    #[test]
    fn sl3_normalization() {
        let (g, s) = slice_for(3, 1);
        assert_eq!(s.rank(), 2);
        assert_eq!(s.degrees, vec![2, 3]);
        // restriction identities were verified symbolically inside
        // build_slice; spot-check at a rational point
        let c = vec![rat(3, 2), rat(-7, 5)];
        let pt = s.point(&c);
        let zero = DegVec(vec![0]);
        let point: BTreeMap<VarId, Rational> = pt
            .iter()
            .enumerate()
            .map(|(i, v)| (VarId::dual(i, zero.clone()), v.clone()))
            .collect();
        assert_eq!(s.generators[0].evaluate(&point).unwrap(), c[0]);
        assert_eq!(s.generators[1].evaluate(&point).unwrap(), c[1]);
        // every random slice point is regular
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let c: Vec<Rational> = (0..2).map(|_| rat_int(rng.gen_range(-9..=9))).collect();
            assert!(g.is_regular_element(&s.point(&c)));
        }
    }

    #[test]
    fn sl4_normalization_mixes_coefficients() {
        // for n = 4 the degree-4 generator needs a multiple of e_2² as well
        let (_, s) = slice_for(4, 1);
        assert_eq!(s.degrees, vec![2, 3, 4]);
        let c = vec![rat_int(2), rat_int(-1), rat(1, 3)];
        let pt = s.point(&c);
        let zero = DegVec(vec![0]);
        let point: BTreeMap<VarId, Rational> = pt
            .iter()
            .enumerate()
            .map(|(i, v)| (VarId::dual(i, zero.clone()), v.clone()))
            .collect();
        for (j, gen) in s.generators.iter().enumerate() {
            assert_eq!(gen.evaluate(&point).unwrap(), c[j]);
        }
    }

    fn setup(n: usize, mu: &[i64]) -> (MulticurrentAlgebra, PrincipalSlice, Vec<InvariantFamily>) {
        let g = LieAlgebra::sl_n_chevalley(n).unwrap();
        let staircase = Staircase::from_box(&DegVec(mu.to_vec()));
        let slice = build_slice(&g, staircase.ell()).unwrap();
        let families: Vec<InvariantFamily> = slice
            .generators
            .iter()
            .enumerate()
            .map(|(idx, p)| InvariantFamily::expand_seed(idx + 1, p.clone(), &staircase).unwrap())
            .collect();
        let mca = MulticurrentAlgebra::new(g, staircase);
        (mca, slice, families)
    }

    #[test]
    fn restriction_hits_coordinates() {
        let (mca, slice, families) = setup(2, &[1]);
        let ts = TruncatedSlice::new(&slice, &mca);
        for (j, family) in families.iter().enumerate() {
            for omega in mca.staircase().iter() {
                let restricted = ts.restrict(&family.components[omega]).unwrap();
                let expected = Polynomial::variable(ts.epsilon_var(j + 1, omega));
                assert_eq!(restricted, expected, "R(p^{}_{omega}) != ε", j + 1);
            }
        }
        // constants restrict to themselves
        let c = Polynomial::constant(rat(9, 4));
        assert_eq!(ts.restrict(&c).unwrap(), c);
        // non-invariant inputs restrict to non-coordinate polynomials
        let raw = Polynomial::variable(VarId::dual(sl_h_index(2, 1), DegVec(vec![0])));
        assert!(ts.restrict(&raw).unwrap().is_zero());
        let raw_sq = Polynomial::variable(VarId::dual(sl_e_index(2, 2, 1), DegVec(vec![0]))).pow(2);
        let r = ts.restrict(&raw_sq).unwrap();
        assert_eq!(
            r,
            Polynomial::variable(ts.epsilon_var(1, &DegVec(vec![0]))).pow(2)
        );
        assert_ne!(r, Polynomial::variable(ts.epsilon_var(1, &DegVec(vec![0]))));
    }

    #[test]
    fn derivative_pairing_is_kronecker() {
        let (mca, slice, families) = setup(2, &[1]);
        let ts = TruncatedSlice::new(&slice, &mca);
        let mut eps = BTreeMap::new();
        eps.insert((1, DegVec(vec![0])), rat(2, 3));
        eps.insert((1, DegVec(vec![1])), rat_int(-4));
        let x = ts.point_from_epsilon(&eps);
        for omega in mca.staircase().iter() {
            for lambda in mca.staircase().iter() {
                let d = ts
                    .derivative_pairing(&families, 1, omega, 1, lambda, &x)
                    .unwrap();
                let expected = if omega == lambda {
                    rat_int(1)
                } else {
                    rat_int(0)
                };
                assert_eq!(d, expected);
            }
        }
    }

    #[test]
    fn reduce_identity_on_slice_points() {
        let (mca, slice, families) = setup(2, &[1]);
        let ts = TruncatedSlice::new(&slice, &mca);
        let mut eps = BTreeMap::new();
        eps.insert((1, DegVec(vec![0])), rat_int(3));
        eps.insert((1, DegVec(vec![1])), rat(1, 2));
        let x = ts.point_from_epsilon(&eps);
        let res = ts.reduce_to_slice(&x).unwrap();
        assert_eq!(res.output, x);
        assert!(res.log.is_empty());
        ts.verify_uniqueness(&x, &res.output, &families).unwrap();
    }

    #[test]
    fn reduce_conjugated_element_recovers_coordinates() {
        let (mca, slice, families) = setup(2, &[1]);
        let ts = TruncatedSlice::new(&slice, &mca);
        let mut eps = BTreeMap::new();
        eps.insert((1, DegVec(vec![0])), rat_int(1));
        eps.insert((1, DegVec(vec![1])), rat_int(5));
        let x0 = ts.point_from_epsilon(&eps);
        // conjugate away from the slice
        let z = vec![rat_int(1), rat_int(-2), rat_int(1)];
        let moved = ts.exp_ad(&z, &DegVec(vec![1]), &x0);
        assert_ne!(moved, x0);
        let res = ts.reduce_to_slice(&moved).unwrap();
        assert_eq!(res.output, x0, "the slice point of the orbit is unique");
        ts.verify_uniqueness(&moved, &res.output, &families)
            .unwrap();
        // replaying the log reproduces the output
        assert_eq!(ts.apply_log(&moved, &res.log).unwrap(), res.output);
    }

    #[test]
    fn reduce_with_base_conjugation() {
        let (mca, slice, families) = setup(2, &[1]);
        let ts = TruncatedSlice::new(&slice, &mca);
        // (x+ + h) ⊗ 1 is regular with degree-zero part off the slice
        let (xp, h) = (sl_e_index(2, 1, 2), sl_h_index(2, 1));
        let mut x = MCElement::zero();
        x.add_coord(xp, DegVec(vec![0]), rat_int(1));
        x.add_coord(h, DegVec(vec![0]), rat_int(1));
        let res = ts.reduce_to_slice(&x).unwrap();
        assert!(matches!(res.log[0], ReductionStep::BaseConjugation { .. }));
        ts.verify_uniqueness(&x, &res.output, &families).unwrap();
        // the slice coordinate equals the invariant value: (h*)²+x-*x+* at
        // h=1, x+=1, x- = 0 gives 1
        let eps = ts.epsilon_coords(&res.output).unwrap();
        assert_eq!(eps[&(1, DegVec(vec![0]))], rat_int(1));
        assert_eq!(ts.apply_log(&x, &res.log).unwrap(), res.output);
    }

    #[test]
    fn reduce_rejects_irregular_elements() {
        let (mca, slice, _) = setup(2, &[1]);
        let ts = TruncatedSlice::new(&slice, &mca);
        let mut x = MCElement::zero();
        x.add_coord(sl_h_index(2, 1), DegVec(vec![1]), rat_int(1));
        let err = ts.reduce_to_slice(&x).unwrap_err();
        assert_eq!(
            err,
            SliceError::NotRegular {
                centralizer_dim: 3,
                index: 1
            }
        );
    }

    #[test]
    fn random_regular_reduction_pipeline_sl3() {
        let (mca, slice, families) = setup(3, &[1]);
        let ts = TruncatedSlice::new(&slice, &mca);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut done = 0;
        while done < 3 {
            let mut x = MCElement::zero();
            for (i, d) in mca.basis() {
                x.add_coord(*i, d.clone(), rat_int(rng.gen_range(-5..=5)));
            }
            if !mca.is_regular_element(&x).unwrap() {
                continue;
            }
            done += 1;
            let res = ts.reduce_to_slice(&x).unwrap();
            // step bound: one base conjugation plus at most |Ω₁ \ {0}| exponentials
            assert!(res.log.len() <= 1 + (mca.staircase().len() - 1));
            assert!(ts.contains(&res.output));
            ts.verify_uniqueness(&x, &res.output, &families).unwrap();
            ts.transversality(&res.output).unwrap();
            assert!(mca.is_regular_element(&res.output).unwrap());
            assert_eq!(ts.apply_log(&x, &res.log).unwrap(), res.output);
        }
    }

    #[test]
    fn transversality_at_base_point() {
        let (mca, slice, _) = setup(2, &[1]);
        let ts = TruncatedSlice::new(&slice, &mca);
        let mut x = MCElement::zero();
        x.insert_degree_part(&DegVec(vec![0]), &slice.triple.x_plus);
        assert_eq!(ts.transversality(&x).unwrap(), 6);
    }

    #[test]
    fn transversality_on_trivial_staircase() {
        let (mca, slice, _) = setup(2, &[0]);
        let ts = TruncatedSlice::new(&slice, &mca);
        let mut eps = BTreeMap::new();
        eps.insert((1, DegVec(vec![0])), rat_int(7));
        let x = ts.point_from_epsilon(&eps);
        assert_eq!(ts.transversality(&x).unwrap(), 3);
    }

    #[test]
    fn reduction_log_json_round_trip() {
        let step = ReductionStep::ExpAd {
            z: vec![rat(1, 2), rat_int(0), rat_int(-3)],
            nu: DegVec(vec![1, 0]),
        };
        assert_eq!(ReductionStep::from_json(&step.to_json()).unwrap(), step);
        let step = ReductionStep::BaseConjugation {
            matrix: QMatrix::identity(3),
        };
        assert_eq!(ReductionStep::from_json(&step.to_json()).unwrap(), step);
    }

    #[test]
    fn partitions_enumeration() {
        assert_eq!(partitions_min2(2, 4), vec![vec![2]]);
        assert_eq!(partitions_min2(3, 4), vec![vec![3]]);
        assert_eq!(partitions_min2(4, 4), vec![vec![4], vec![2, 2]]);
        assert_eq!(partitions_min2(5, 4), vec![vec![3, 2]]);
        assert_eq!(
            partitions_min2(6, 6),
            vec![vec![6], vec![4, 2], vec![3, 3], vec![2, 2, 2]]
        );
    }

    #[test]
    fn restriction_identity_over_two_variable_box() {
        let (mca, slice, families) = setup(2, &[1, 1]);
        let ts = TruncatedSlice::new(&slice, &mca);
        for omega in mca.staircase().iter() {
            let restricted = ts.restrict(&families[0].components[omega]).unwrap();
            assert_eq!(restricted, Polynomial::variable(ts.epsilon_var(1, omega)));
        }
    }
}
