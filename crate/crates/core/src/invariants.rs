//! Expansion of invariant polynomials from `g` to `g ⊗ A`, and the
//! certifiers built on top of it.
//!
//! Substituting every base variable `v` by the sum `Σ_{ω∈Ω₁} v_ω` turns a
//! polynomial on `g` (or on `g*`) into a polynomial on `g ⊗ A` (or its
//! dual), which then splits into multigraded components.  For an invariant
//! input, the components indexed by the admissible degree set are again
//! invariant; this module verifies that exactly, together with algebraic
//! independence (Jacobian criterion), the two-stage expansion identity,
//! the positive-degree support property, and the transport between the
//! primal and dual pictures along a nondegenerate invariant form.

use crate::degree::DegVec;
use crate::linalg::{polynomial_matrix_rank, QMatrix};
use crate::multicurrent::MulticurrentAlgebra;
use crate::poly::{PolyError, Polynomial, VarId};
use crate::rational::Rational;
use crate::staircase::{DegreeSet, Staircase};
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Largest variable count accepted by the symbolic-rank independence mode.
pub const EXACT_RANK_MAX_VARS: usize = 12;
/// Number of random evaluation points tried by the Jacobian criterion.
pub const INDEPENDENCE_RETRIES: usize = 3;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InvariantError {
    #[error("input mixes degrees or does not consist of degree-zero variables")]
    MixedDegreeInput,
    #[error("input mixes primal and dual variables")]
    MixedPicture,
    #[error("input is not homogeneous of positive degree")]
    NonHomogeneous,
    #[error("degree {0} lies outside the staircase")]
    DegreeOutsideStaircase(DegVec),
    #[error("seed polynomial is not invariant: derivation by basis element {y} is nonzero")]
    SeedNotInvariant { y: usize },
    #[error("component at {gamma} is not invariant under basis element {y} at degree {nu}")]
    NonInvariantComponent { gamma: DegVec, y: usize, nu: DegVec },
    #[error("families must share one picture")]
    PictureMismatch,
    #[error("staircase has no greatest element; {0} is unavailable")]
    NoGreatestElement(&'static str),
    #[error("bilinear form is degenerate")]
    DegenerateForm,
    #[error("transport mismatch between pictures: {0}")]
    ProportionalityFailure(String),
    #[error("component {gamma} of generator {j} violates positive-degree support")]
    SupportViolation { j: usize, gamma: DegVec },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("exact rank mode supports at most {max} variables, got {vars}")]
    ExactRankTooLarge { vars: usize, max: usize },
    #[error("double expansion mismatch at {0}")]
    DoubleExpansionMismatch(DegVec),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Picture {
    Primal,
    Dual,
}

impl std::fmt::Display for Picture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Picture::Primal => write!(f, "primal"),
            Picture::Dual => write!(f, "dual"),
        }
    }
}

/// Checks that `p` is a polynomial in degree-zero variables of one picture
/// and returns that picture.
fn input_picture(p: &Polynomial, ell: usize) -> Result<Picture, InvariantError> {
    let vars = p.variables();
    let zero = DegVec::zero(ell);
    let mut picture = None;
    for v in &vars {
        if v.degree != zero {
            return Err(InvariantError::MixedDegreeInput);
        }
        match picture {
            None => picture = Some(v.dual),
            Some(d) if d != v.dual => return Err(InvariantError::MixedPicture),
            _ => {}
        }
    }
    match picture {
        Some(true) => Ok(Picture::Dual),
        Some(false) => Ok(Picture::Primal),
        None => Err(InvariantError::NonHomogeneous), // constant input
    }
}

/// Expands a polynomial on `g` (or `g*`) over the staircase: every variable
/// goes to the sum of its copies at all staircase degrees, and the result
/// is split into multigraded components.  Summing the components back
/// reassembles the full substitution image.
pub fn expand(
    p: &Polynomial,
    staircase: &Staircase,
) -> Result<BTreeMap<DegVec, Polynomial>, InvariantError> {
    let ell = staircase.ell();
    input_picture(p, ell)?;
    let sigma: BTreeMap<VarId, Polynomial> = p
        .variables()
        .into_iter()
        .map(|v| {
            let sum = staircase
                .iter()
                .map(|deg| {
                    Polynomial::variable(VarId {
                        degree: deg.clone(),
                        basis: v.basis,
                        dual: v.dual,
                    })
                })
                .fold(Polynomial::zero(), |acc, q| &acc + &q);
            (v, sum)
        })
        .collect();
    let image = p.substitute(&sigma)?;
    Ok(image.gamma_components(ell))
}

/// One family of expanded invariants: the components of a single
/// homogeneous invariant of `g`, indexed by multidegree.
#[derive(Clone, Debug)]
pub struct InvariantFamily {
    pub j: usize,
    pub k: u32,
    pub picture: Picture,
    /// The degree-zero polynomial that was expanded.
    pub seed: Polynomial,
    /// All nonzero components of the expansion.
    pub components: BTreeMap<DegVec, Polynomial>,
}

impl InvariantFamily {
    pub fn expand_seed(
        j: usize,
        seed: Polynomial,
        staircase: &Staircase,
    ) -> Result<Self, InvariantError> {
        let picture = input_picture(&seed, staircase.ell())?;
        let k = seed
            .homogeneous_degree()
            .ok_or(InvariantError::NonHomogeneous)?;
        if k == 0 {
            return Err(InvariantError::NonHomogeneous);
        }
        let components = expand(&seed, staircase)?;
        Ok(InvariantFamily {
            j,
            k,
            picture,
            seed,
            components,
        })
    }

    /// The index set at which components are guaranteed invariant.
    ///
    /// Primal picture: `Ω₁^k ∖ (−Φ_k)` for any staircase.  Dual picture:
    /// `Ω₁`, available only when the staircase has a greatest element
    /// (the dual transport needs the top pairing); otherwise empty.
    pub fn admissible_indices(&self, staircase: &Staircase) -> DegreeSet {
        match self.picture {
            Picture::Primal => staircase.admissible_gammas(self.k),
            Picture::Dual => {
                if staircase.greatest_element().is_some() {
                    staircase.degrees()
                } else {
                    DegreeSet::new()
                }
            }
        }
    }

    /// The admissible components: the generator family proper.
    pub fn generator_components(&self, staircase: &Staircase) -> BTreeMap<DegVec, Polynomial> {
        let admissible = self.admissible_indices(staircase);
        self.components
            .iter()
            .filter(|(gamma, _)| admissible.contains(gamma))
            .map(|(gamma, p)| (gamma.clone(), p.clone()))
            .collect()
    }

    /// Wire format; only the admissible components are emitted.
    pub fn to_json(&self, staircase: &Staircase) -> serde_json::Value {
        let components: Vec<serde_json::Value> = self
            .generator_components(staircase)
            .iter()
            .map(|(gamma, p)| serde_json::json!({ "gamma": gamma.0, "poly": p.to_json() }))
            .collect();
        serde_json::json!({
            "j": self.j,
            "k": self.k,
            "picture": self.picture.to_string(),
            "components": components,
        })
    }
}

/// A derivation of the polynomial ring determined by the adjoint action of
/// one basis element `y ⊗ τ^ν` of `g ⊗ A`, as a linear map on variables
/// extended by the Leibniz rule.
#[derive(Clone, Debug)]
pub struct Derivation {
    images: BTreeMap<VarId, Polynomial>,
}

impl Derivation {
    pub fn apply(&self, p: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in p.terms() {
            for (v, e) in m.powers() {
                let image = match self.images.get(v) {
                    Some(q) if !q.is_zero() => q,
                    _ => continue,
                };
                let rest = Polynomial::monomial(
                    m.div_var(v).unwrap(),
                    c * Rational::from_integer(e.into()),
                );
                out = &out + &(&rest * image);
            }
        }
        out
    }
}

/// The derivation for the action of `b_y ⊗ τ^ν`.
///
/// Primal picture: a variable at degree `λ` maps to `[b_y, b_m] ⊗ τ^{ν+λ}`,
/// truncated to zero outside the staircase.  Dual picture: the coadjoint
/// image lands at degree `λ − ν`, truncated to zero outside the staircase.
pub fn adjoint_derivation(
    mca: &MulticurrentAlgebra,
    y: usize,
    nu: &DegVec,
    picture: Picture,
) -> Result<Derivation, InvariantError> {
    if !mca.staircase().contains(nu) {
        return Err(InvariantError::DegreeOutsideStaircase(nu.clone()));
    }
    let g = mca.base();
    let mut images = BTreeMap::new();
    for lambda in mca.staircase().iter() {
        let target = match picture {
            Picture::Primal => lambda.add(nu),
            Picture::Dual => lambda.sub(nu),
        };
        let in_range = target.is_nonneg() && mca.staircase().contains(&target);
        for m in 0..g.dim() {
            let var = VarId {
                degree: lambda.clone(),
                basis: m,
                dual: picture == Picture::Dual,
            };
            if !in_range {
                images.insert(var, Polynomial::zero());
                continue;
            }
            let mut image = Polynomial::zero();
            for kk in 0..g.dim() {
                let coeff = match picture {
                    // [b_y, b_m] = Σ_k c[y][m][k] b_k
                    Picture::Primal => g.structure_constant(y, m, kk),
                    // b_y · b_m* = Σ_k c[k][y][m] b_k*
                    Picture::Dual => g.structure_constant(kk, y, m),
                };
                if !coeff.is_zero() {
                    let w = VarId {
                        degree: target.clone(),
                        basis: kk,
                        dual: picture == Picture::Dual,
                    };
                    image = &image + &Polynomial::variable(w).scale(coeff);
                }
            }
            images.insert(var, image);
        }
    }
    Ok(Derivation { images })
}

/// All `dim(g) · |Ω₁|` adjoint derivations in a fixed picture.
pub fn all_derivations(
    mca: &MulticurrentAlgebra,
    picture: Picture,
) -> Vec<((usize, DegVec), Derivation)> {
    let mut out = Vec::new();
    for nu in mca.staircase().iter() {
        for y in 0..mca.base().dim() {
            let d = adjoint_derivation(mca, y, nu, picture).expect("nu comes from the staircase");
            out.push(((y, nu.clone()), d));
        }
    }
    out
}

/// Independent computation of the same action, used as the cross-checking
/// oracle: no derivation table is built, the image of each variable
/// occurrence is produced inline from the structure constants.
pub fn apply_derivation_direct(
    mca: &MulticurrentAlgebra,
    y: usize,
    nu: &DegVec,
    picture: Picture,
    p: &Polynomial,
) -> Polynomial {
    let g = mca.base();
    let mut out = Polynomial::zero();
    for (m, c) in p.terms() {
        for (v, e) in m.powers() {
            let target = match picture {
                Picture::Primal => v.degree.add(nu),
                Picture::Dual => v.degree.sub(nu),
            };
            if !target.is_nonneg() || !mca.staircase().contains(&target) {
                continue;
            }
            let rest = m.div_var(v).unwrap();
            let scale = c * Rational::from_integer(e.into());
            for kk in 0..g.dim() {
                let coeff = match picture {
                    Picture::Primal => g.structure_constant(y, v.basis, kk),
                    Picture::Dual => g.structure_constant(kk, y, v.basis),
                };
                if coeff.is_zero() {
                    continue;
                }
                let w = VarId {
                    degree: target.clone(),
                    basis: kk,
                    dual: v.dual,
                };
                out = &out
                    + &Polynomial::monomial(
                        rest.mul(&crate::poly::Monomial::var(w)),
                        &scale * coeff,
                    );
            }
        }
    }
    out
}

/// Per-family invariance report.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InvarianceReport {
    /// Admissible components verified to be annihilated by every derivation.
    pub admissible_verified: Vec<DegVec>,
    /// Components outside the admissible set that happen to be invariant.
    pub extra_invariant: Vec<DegVec>,
    /// Components outside the admissible set that are not invariant.
    pub non_invariant_outside: Vec<DegVec>,
    /// Total number of derivation applications performed.
    pub derivations_applied: usize,
}

/// Verifies invariance of a family produced by [`InvariantFamily::expand_seed`].
///
/// The seed itself is first checked to be `g`-invariant by applying the
/// `dim(g)` degree-zero derivations.  Every component whose index lies in
/// the admissible set must then be annihilated by all `dim(g) · |Ω₁|`
/// derivations; a nonzero image is a hard failure.  Components outside
/// the admissible set are classified informationally.
pub fn check_invariance(
    family: &InvariantFamily,
    mca: &MulticurrentAlgebra,
) -> Result<InvarianceReport, InvariantError> {
    let staircase = mca.staircase();
    let ell = staircase.ell();
    let zero = DegVec::zero(ell);
    for y in 0..mca.base().dim() {
        let d = adjoint_derivation(mca, y, &zero, family.picture)?;
        if !d.apply(&family.seed).is_zero() {
            return Err(InvariantError::SeedNotInvariant { y });
        }
    }
    let derivations = all_derivations(mca, family.picture);
    let admissible = family.admissible_indices(staircase);
    let mut report = InvarianceReport::default();
    for (gamma, component) in &family.components {
        let mut failed_at = None;
        for ((y, nu), d) in &derivations {
            report.derivations_applied += 1;
            if !d.apply(component).is_zero() {
                failed_at = Some((*y, nu.clone()));
                break;
            }
        }
        match (admissible.contains(gamma), failed_at) {
            (true, Some((y, nu))) => {
                return Err(InvariantError::NonInvariantComponent {
                    gamma: gamma.clone(),
                    y,
                    nu,
                });
            }
            (true, None) => report.admissible_verified.push(gamma.clone()),
            (false, None) => report.extra_invariant.push(gamma.clone()),
            (false, Some(_)) => report.non_invariant_outside.push(gamma.clone()),
        }
    }
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct IndependenceOptions {
    pub retries: usize,
    pub seed: u64,
    pub exact: bool,
}

impl Default for IndependenceOptions {
    fn default() -> Self {
        IndependenceOptions {
            retries: INDEPENDENCE_RETRIES,
            seed: 0,
            exact: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct IndependenceReport {
    pub num_polynomials: usize,
    pub num_variables: usize,
    pub rank: usize,
    pub independent: bool,
    pub attempts: usize,
    pub exact_mode: bool,
}

/// Jacobian criterion for algebraic independence of the generator
/// components of the given families (characteristic zero).
///
/// The Jacobian of all admissible components with respect to all variables
/// of the ambient algebra is evaluated at seeded random integer points and
/// its exact rank compared with the number of polynomials; fresh points are
/// tried up to the retry bound before declaring dependence.  The exact mode
/// computes the symbolic rank over the rational function field instead.
pub fn check_independence(
    families: &[InvariantFamily],
    mca: &MulticurrentAlgebra,
    opts: &IndependenceOptions,
) -> Result<IndependenceReport, InvariantError> {
    let picture = families
        .first()
        .map(|f| f.picture)
        .ok_or(InvariantError::PictureMismatch)?;
    if families.iter().any(|f| f.picture != picture) {
        return Err(InvariantError::PictureMismatch);
    }
    let staircase = mca.staircase();
    let polys: Vec<&Polynomial> = families
        .iter()
        .flat_map(|f| {
            let admissible = f.admissible_indices(staircase);
            f.components
                .iter()
                .filter(move |(gamma, _)| admissible.contains(gamma))
                .map(|(_, p)| p)
        })
        .collect();
    let vars: Vec<VarId> = mca
        .basis()
        .iter()
        .map(|(i, d)| VarId {
            degree: d.clone(),
            basis: *i,
            dual: picture == Picture::Dual,
        })
        .collect();
    let jacobian: Vec<Vec<Polynomial>> = polys
        .iter()
        .map(|p| vars.iter().map(|v| p.partial_derivative(v)).collect())
        .collect();

    if opts.exact {
        if vars.len() > EXACT_RANK_MAX_VARS {
            return Err(InvariantError::ExactRankTooLarge {
                vars: vars.len(),
                max: EXACT_RANK_MAX_VARS,
            });
        }
        let rank = polynomial_matrix_rank(&jacobian);
        return Ok(IndependenceReport {
            num_polynomials: polys.len(),
            num_variables: vars.len(),
            rank,
            independent: rank == polys.len(),
            attempts: 0,
            exact_mode: true,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best_rank = 0;
    let mut attempts = 0;
    for _ in 0..opts.retries.max(1) {
        attempts += 1;
        let coords = crate::lie::random_int_vector(&mut rng, vars.len());
        let point: BTreeMap<VarId, Rational> = vars.iter().cloned().zip(coords).collect();
        let m = QMatrix::from_rows(
            jacobian
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|p| p.evaluate(&point))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?,
        );
        let rank = m.rank();
        best_rank = best_rank.max(rank);
        if rank == polys.len() {
            break;
        }
    }
    Ok(IndependenceReport {
        num_polynomials: polys.len(),
        num_variables: vars.len(),
        rank: best_rank,
        independent: best_rank == polys.len(),
        attempts,
        exact_mode: false,
    })
}

/// Two-stage expansion consistency: expanding over the first `ℓ−1`
/// coordinates and then over the last one must reproduce the one-shot
/// expansion component by component.
pub fn check_double_expansion(p: &Polynomial, staircase: &Staircase) -> Result<(), InvariantError> {
    let ell = staircase.ell();
    if ell < 2 {
        return Err(InvariantError::Precondition(
            "double expansion needs ℓ >= 2".into(),
        ));
    }
    let mu = staircase
        .greatest_element()
        .ok_or(InvariantError::NoGreatestElement("check_double_expansion"))?;
    input_picture(p, ell)?;

    let inner_box = Staircase::from_box(&DegVec(mu.0[..ell - 1].to_vec()));
    let last_max = mu.0[ell - 1];
    let extend = |d: &[i64], m: i64| {
        let mut v = d.to_vec();
        v.push(m);
        DegVec(v)
    };

    // stage 1: expand over the first ℓ−1 coordinates, keeping the last at 0
    let sigma1: BTreeMap<VarId, Polynomial> = p
        .variables()
        .into_iter()
        .map(|v| {
            let sum = inner_box
                .iter()
                .map(|d| {
                    Polynomial::variable(VarId {
                        degree: extend(&d.0, 0),
                        basis: v.basis,
                        dual: v.dual,
                    })
                })
                .fold(Polynomial::zero(), |acc, q| &acc + &q);
            (v, sum)
        })
        .collect();
    let stage1 = p.substitute(&sigma1)?.gamma_components(ell);

    // stage 2: expand each component over the last coordinate
    let mut two_stage: BTreeMap<DegVec, Polynomial> = BTreeMap::new();
    for component in stage1.values() {
        let sigma2: BTreeMap<VarId, Polynomial> = component
            .variables()
            .into_iter()
            .map(|v| {
                let base = &v.degree.0[..ell - 1];
                let sum = (0..=last_max)
                    .map(|m| {
                        Polynomial::variable(VarId {
                            degree: extend(base, m),
                            basis: v.basis,
                            dual: v.dual,
                        })
                    })
                    .fold(Polynomial::zero(), |acc, q| &acc + &q);
                (v, sum)
            })
            .collect();
        for (gamma, q) in component.substitute(&sigma2)?.gamma_components(ell) {
            let slot = two_stage.entry(gamma).or_insert_with(Polynomial::zero);
            *slot = &*slot + &q;
        }
    }

    let one_shot = expand(p, staircase)?;
    for (gamma, q) in &one_shot {
        if two_stage.get(gamma) != Some(q) {
            return Err(InvariantError::DoubleExpansionMismatch(gamma.clone()));
        }
    }
    for (gamma, q) in &two_stage {
        if !one_shot.contains_key(gamma) && !q.is_zero() {
            return Err(InvariantError::DoubleExpansionMismatch(gamma.clone()));
        }
    }
    Ok(())
}

/// Asserts that every admissible component index of every primal family is
/// strictly positive, and that every monomial of every such component
/// contains a variable of positive degree.  Requires `μ > 0` and all
/// generator degrees at least 2.
pub fn positive_degree_support(
    families: &[InvariantFamily],
    staircase: &Staircase,
) -> Result<(), InvariantError> {
    let mu = staircase
        .greatest_element()
        .ok_or(InvariantError::NoGreatestElement("positive_degree_support"))?;
    if !mu.is_positive() {
        return Err(InvariantError::Precondition(
            "positive-degree support needs μ > 0 (the algebra must not be the base field)".into(),
        ));
    }
    for f in families {
        if f.picture != Picture::Primal {
            return Err(InvariantError::PictureMismatch);
        }
        if f.k < 2 {
            return Err(InvariantError::Precondition(format!(
                "generator {} has degree {} < 2",
                f.j, f.k
            )));
        }
        for (gamma, component) in f.generator_components(staircase) {
            if !gamma.is_positive() {
                return Err(InvariantError::SupportViolation { j: f.j, gamma });
            }
            for (m, _) in component.terms() {
                if !m.powers().any(|(v, _)| v.degree.is_positive()) {
                    return Err(InvariantError::SupportViolation { j: f.j, gamma });
                }
            }
        }
    }
    Ok(())
}

/// Transports a degree-zero polynomial between the pictures along a
/// nondegenerate symmetric form: `b_i ↦ Σ_m κ_{im} b_m*`.
pub fn seed_to_dual(
    p: &Polynomial,
    kappa: &QMatrix,
    ell: usize,
) -> Result<Polynomial, InvariantError> {
    if input_picture(p, ell)? != Picture::Primal {
        return Err(InvariantError::PictureMismatch);
    }
    let sigma: BTreeMap<VarId, Polynomial> = p
        .variables()
        .into_iter()
        .map(|v| {
            let image = (0..kappa.cols())
                .filter(|m| !kappa[(v.basis, *m)].is_zero())
                .map(|m| {
                    Polynomial::variable(VarId::dual(m, DegVec::zero(ell)))
                        .scale(&kappa[(v.basis, m)])
                })
                .fold(Polynomial::zero(), |acc, q| &acc + &q);
            (v, image)
        })
        .collect();
    Ok(p.substitute(&sigma)?)
}

/// Inverse transport, `b_m* ↦ Σ_i (κ^{-1})_{mi} b_i`.
pub fn seed_to_primal(
    p: &Polynomial,
    kappa: &QMatrix,
    ell: usize,
) -> Result<Polynomial, InvariantError> {
    if input_picture(p, ell)? != Picture::Dual {
        return Err(InvariantError::PictureMismatch);
    }
    let inv = kappa.inverse().ok_or(InvariantError::DegenerateForm)?;
    let sigma: BTreeMap<VarId, Polynomial> = p
        .variables()
        .into_iter()
        .map(|v| {
            let image = (0..inv.cols())
                .filter(|m| !inv[(v.basis, *m)].is_zero())
                .map(|m| {
                    Polynomial::variable(VarId::primal(m, DegVec::zero(ell)))
                        .scale(&inv[(v.basis, m)])
                })
                .fold(Polynomial::zero(), |acc, q| &acc + &q);
            (v, image)
        })
        .collect();
    Ok(p.substitute(&sigma)?)
}

/// Transports a primal family to the dual picture along the top pairing
/// `κ_μ`: the variable at degree `ω` maps to the dual variables at degree
/// `μ − ω` paired by `κ`, sending the component at `kμ − ω` to the dual
/// component at `ω`.
///
/// The result is cross-checked against the direct expansion of the
/// transported seed; any discrepancy is reported as a transport failure.
pub fn dualize(
    family: &InvariantFamily,
    kappa: &QMatrix,
    mca: &MulticurrentAlgebra,
) -> Result<InvariantFamily, InvariantError> {
    if family.picture != Picture::Primal {
        return Err(InvariantError::PictureMismatch);
    }
    let staircase = mca.staircase();
    let ell = staircase.ell();
    let mu = staircase
        .greatest_element()
        .ok_or(InvariantError::NoGreatestElement("dualize"))?;
    if kappa.rank() != kappa.rows() {
        return Err(InvariantError::DegenerateForm);
    }

    let mut components = BTreeMap::new();
    for (gamma, component) in &family.components {
        let sigma: BTreeMap<VarId, Polynomial> = component
            .variables()
            .into_iter()
            .map(|v| {
                let target = mu.sub(&v.degree);
                let image = (0..kappa.cols())
                    .filter(|m| !kappa[(v.basis, *m)].is_zero())
                    .map(|m| {
                        Polynomial::variable(VarId::dual(m, target.clone()))
                            .scale(&kappa[(v.basis, m)])
                    })
                    .fold(Polynomial::zero(), |acc, q| &acc + &q);
                (v, image)
            })
            .collect();
        let image = component.substitute(&sigma)?;
        let dual_index = mu.scale(family.k as i64).sub(gamma);
        components.insert(dual_index, image);
    }

    let dual_seed = seed_to_dual(&family.seed, kappa, ell)?;
    let direct = expand(&dual_seed, staircase)?;
    if direct != components {
        return Err(InvariantError::ProportionalityFailure(
            "transport along the top pairing disagrees with direct expansion".into(),
        ));
    }
    Ok(InvariantFamily {
        j: family.j,
        k: family.k,
        picture: Picture::Dual,
        seed: dual_seed,
        components,
    })
}

/// The single scalar `c` with `b = c · a` componentwise, if one exists.
pub fn proportionality(
    a: &InvariantFamily,
    b: &InvariantFamily,
) -> Result<Rational, InvariantError> {
    if a.picture != b.picture || a.k != b.k {
        return Err(InvariantError::PictureMismatch);
    }
    if !a.components.keys().eq(b.components.keys()) {
        return Err(InvariantError::ProportionalityFailure(
            "component index sets differ".into(),
        ));
    }
    let (gamma, first) = a
        .components
        .iter()
        .next()
        .ok_or_else(|| InvariantError::ProportionalityFailure("empty family".into()))?;
    let (m, ca) = first.terms().next().expect("components are nonzero");
    let cb = b.components[gamma].coefficient(m);
    if cb.is_zero() {
        return Err(InvariantError::ProportionalityFailure(format!(
            "monomial {m} missing from counterpart at {gamma}"
        )));
    }
    let scalar = &cb / ca;
    for (gamma, pa) in &a.components {
        if b.components[gamma] != pa.scale(&scalar) {
            return Err(InvariantError::ProportionalityFailure(format!(
                "components at {gamma} are not proportional by {scalar}"
            )));
        }
    }
    Ok(scalar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{sl_e_index, sl_h_index, LieAlgebra};
    use crate::rational::{rat, rat_int};

    fn sl2() -> LieAlgebra {
        LieAlgebra::sl_n_chevalley(2).unwrap()
    }

    fn sl2_mca(mu: &[i64]) -> MulticurrentAlgebra {
        MulticurrentAlgebra::new(sl2(), Staircase::from_box(&DegVec(mu.to_vec())))
    }

    /// The Casimir as a polynomial function on sl2: (h*)^2 + x-* x+*.
    fn casimir_dual(ell: usize) -> Polynomial {
        let (xp, xm, h) = (sl_e_index(2, 1, 2), sl_e_index(2, 2, 1), sl_h_index(2, 1));
        let hv = Polynomial::variable(VarId::dual(h, DegVec::zero(ell)));
        let xpv = Polynomial::variable(VarId::dual(xp, DegVec::zero(ell)));
        let xmv = Polynomial::variable(VarId::dual(xm, DegVec::zero(ell)));
        &hv.pow(2) + &(&xmv * &xpv)
    }

    /// The Casimir in the symmetric algebra: (1/64)(h^2 + 4 x- x+).
    fn casimir_primal(ell: usize) -> Polynomial {
        let (xp, xm, h) = (sl_e_index(2, 1, 2), sl_e_index(2, 2, 1), sl_h_index(2, 1));
        let hv = Polynomial::variable(VarId::primal(h, DegVec::zero(ell)));
        let xpv = Polynomial::variable(VarId::primal(xp, DegVec::zero(ell)));
        let xmv = Polynomial::variable(VarId::primal(xm, DegVec::zero(ell)));
        (&hv.pow(2) + &(&xmv * &xpv).scale(&rat_int(4))).scale(&rat(1, 64))
    }

    /// Dual components written straight from the closed-form sum
    /// `p_ω = Σ_{0≤γ≤ω} (h*_γ h*_{ω−γ} + x-*_γ x+*_{ω−γ})` over a box.
    fn casimir_dual_component_formula(omega: i64) -> Polynomial {
        let (xp, xm, h) = (sl_e_index(2, 1, 2), sl_e_index(2, 2, 1), sl_h_index(2, 1));
        let var = |i: usize, d: i64| Polynomial::variable(VarId::dual(i, DegVec(vec![d])));
        let mut acc = Polynomial::zero();
        for g in 0..=omega {
            acc = &acc + &(&var(h, g) * &var(h, omega - g));
            acc = &acc + &(&var(xm, g) * &var(xp, omega - g));
        }
        acc
    }

    #[test]
    fn expand_trivial_staircase() {
        let s = Staircase::from_box(&DegVec(vec![0]));
        let p = casimir_dual(1);
        let comps = expand(&p, &s).unwrap();
        assert_eq!(comps.len(), 1);
        // single component p_0 = p with the same variables
        assert_eq!(comps[&DegVec(vec![0])], p);
    }

    #[test]
    fn expand_matches_closed_form_dual_components() {
        let s = Staircase::from_box(&DegVec(vec![1]));
        let comps = expand(&casimir_dual(1), &s).unwrap();
        assert_eq!(
            comps.keys().cloned().collect::<Vec<_>>(),
            vec![DegVec(vec![0]), DegVec(vec![1]), DegVec(vec![2])]
        );
        assert_eq!(comps[&DegVec(vec![0])], casimir_dual_component_formula(0));
        assert_eq!(comps[&DegVec(vec![1])], casimir_dual_component_formula(1));
    }

    #[test]
    fn expansion_reassembles() {
        let s = Staircase::from_box(&DegVec(vec![1]));
        let p = casimir_primal(1);
        let comps = expand(&p, &s).unwrap();
        let sigma: BTreeMap<VarId, Polynomial> = p
            .variables()
            .into_iter()
            .map(|v| {
                let sum = s
                    .iter()
                    .map(|d| Polynomial::variable(VarId::primal(v.basis, d.clone())))
                    .fold(Polynomial::zero(), |acc, q| &acc + &q);
                (v, sum)
            })
            .collect();
        let image = p.substitute(&sigma).unwrap();
        let mut total = Polynomial::zero();
        for q in comps.values() {
            total = &total + q;
        }
        assert_eq!(total, image);
    }

    #[test]
    fn expand_rejects_bad_inputs() {
        let s = Staircase::from_box(&DegVec(vec![1]));
        let mixed = &Polynomial::variable(VarId::dual(0, DegVec(vec![0])))
            * &Polynomial::variable(VarId::primal(1, DegVec(vec![0])));
        assert_eq!(
            expand(&mixed, &s).unwrap_err(),
            InvariantError::MixedPicture
        );
        let shifted = Polynomial::variable(VarId::dual(0, DegVec(vec![1])));
        assert_eq!(
            expand(&shifted, &s).unwrap_err(),
            InvariantError::MixedDegreeInput
        );
    }

    #[test]
    fn derivation_matches_direct_application_and_leibniz() {
        let mca = sl2_mca(&[1]);
        let s = mca.staircase().clone();
        let fam = InvariantFamily::expand_seed(1, casimir_dual(1), &s).unwrap();
        for (gamma, comp) in &fam.components {
            for nu in s.iter() {
                for y in 0..3 {
                    let d = adjoint_derivation(&mca, y, nu, Picture::Dual).unwrap();
                    let a = d.apply(comp);
                    let b = apply_derivation_direct(&mca, y, nu, Picture::Dual, comp);
                    assert_eq!(a, b, "mismatch at γ={gamma}, y={y}, ν={nu}");
                }
            }
        }
        // Leibniz: D(pq) = (Dp)q + p(Dq)
        let p = Polynomial::variable(VarId::dual(0, DegVec(vec![0])));
        let q = &Polynomial::variable(VarId::dual(2, DegVec(vec![1]))).pow(2)
            + &Polynomial::variable(VarId::dual(1, DegVec(vec![0])));
        let d = adjoint_derivation(&mca, 1, &DegVec(vec![1]), Picture::Dual).unwrap();
        let lhs = d.apply(&(&p * &q));
        let rhs = &(&d.apply(&p) * &q) + &(&p * &d.apply(&q));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn derivation_truncation_branches() {
        let mca = sl2_mca(&[1]);
        let d =
            adjoint_derivation(&mca, sl_h_index(2, 1), &DegVec(vec![1]), Picture::Dual).unwrap();
        // λ − ν = 0 branch: degree-1 dual variable maps to degree-0 image
        let v1 = Polynomial::variable(VarId::dual(sl_e_index(2, 1, 2), DegVec(vec![1])));
        let image = d.apply(&v1);
        assert!(!image.is_zero());
        for v in image.variables() {
            assert_eq!(v.degree, DegVec(vec![0]));
        }
        // λ − ν outside the staircase: zero
        let v0 = Polynomial::variable(VarId::dual(sl_e_index(2, 1, 2), DegVec(vec![0])));
        assert!(d.apply(&v0).is_zero());
        // ν outside the staircase is rejected
        assert!(matches!(
            adjoint_derivation(&mca, 0, &DegVec(vec![5]), Picture::Dual),
            Err(InvariantError::DegreeOutsideStaircase(_))
        ));
    }

    #[test]
    fn invariance_of_casimir_families() {
        let mca = sl2_mca(&[1]);
        let s = mca.staircase().clone();
        let fam = InvariantFamily::expand_seed(1, casimir_dual(1), &s).unwrap();
        let report = check_invariance(&fam, &mca).unwrap();
        assert_eq!(
            report.admissible_verified,
            vec![DegVec(vec![0]), DegVec(vec![1])]
        );
        // the component at ω = 2 is outside Ω₁ and not invariant
        assert_eq!(report.non_invariant_outside, vec![DegVec(vec![2])]);

        let fam_primal = InvariantFamily::expand_seed(1, casimir_primal(1), &s).unwrap();
        let report = check_invariance(&fam_primal, &mca).unwrap();
        assert_eq!(
            report.admissible_verified,
            vec![DegVec(vec![1]), DegVec(vec![2])]
        );
    }

    #[test]
    fn non_invariant_seed_fails() {
        let mca = sl2_mca(&[1]);
        let s = mca.staircase().clone();
        let h_star = Polynomial::variable(VarId::dual(sl_h_index(2, 1), DegVec(vec![0])));
        let fam = InvariantFamily::expand_seed(1, h_star, &s).unwrap();
        assert!(matches!(
            check_invariance(&fam, &mca),
            Err(InvariantError::SeedNotInvariant { .. })
        ));
    }

    #[test]
    fn independence_rank_and_negative_control() {
        let mca = sl2_mca(&[1]);
        let s = mca.staircase().clone();
        let fam = InvariantFamily::expand_seed(1, casimir_dual(1), &s).unwrap();
        let report = check_independence(
            std::slice::from_ref(&fam),
            &mca,
            &IndependenceOptions::default(),
        )
        .unwrap();
        assert_eq!(report.num_polynomials, 2);
        assert!(report.independent);

        let duplicated = vec![fam.clone(), fam];
        let report =
            check_independence(&duplicated, &mca, &IndependenceOptions::default()).unwrap();
        assert_eq!(report.num_polynomials, 4);
        assert!(!report.independent);
        assert_eq!(report.attempts, INDEPENDENCE_RETRIES);
    }

    #[test]
    fn independence_agrees_between_base_and_expansion() {
        // independence over the base algebra (trivial staircase) matches
        // independence of the expanded families, in both directions
        let g = LieAlgebra::sl_n_chevalley(3).unwrap();
        let slice = crate::slice::build_slice(&g, 1).unwrap();
        let trivial = Staircase::from_box(&DegVec(vec![0]));
        let expanded = Staircase::from_box(&DegVec(vec![1]));
        let fams = |s: &Staircase| -> Vec<InvariantFamily> {
            slice
                .generators
                .iter()
                .enumerate()
                .map(|(i, p)| InvariantFamily::expand_seed(i + 1, p.clone(), s).unwrap())
                .collect()
        };
        let mca0 = MulticurrentAlgebra::new(g.clone(), trivial.clone());
        let mca1 = MulticurrentAlgebra::new(g, expanded.clone());
        let opts = IndependenceOptions::default();
        let base = check_independence(&fams(&trivial), &mca0, &opts).unwrap();
        let exp = check_independence(&fams(&expanded), &mca1, &opts).unwrap();
        assert!(base.independent && exp.independent);

        let mut dup0 = fams(&trivial);
        dup0.push(dup0[0].clone());
        let mut dup1 = fams(&expanded);
        dup1.push(dup1[0].clone());
        let base = check_independence(&dup0, &mca0, &opts).unwrap();
        let exp = check_independence(&dup1, &mca1, &opts).unwrap();
        assert!(!base.independent && !exp.independent);
    }

    #[test]
    fn independence_exact_mode_agrees() {
        let mca = sl2_mca(&[1]);
        let s = mca.staircase().clone();
        let fam = InvariantFamily::expand_seed(1, casimir_dual(1), &s).unwrap();
        let opts = IndependenceOptions {
            exact: true,
            ..Default::default()
        };
        let report = check_independence(&[fam], &mca, &opts).unwrap();
        assert!(report.exact_mode && report.independent);
        assert_eq!(report.rank, 2);
    }

    #[test]
    fn double_expansion_consistency() {
        let s = Staircase::from_box(&DegVec(vec![1, 1]));
        check_double_expansion(&casimir_primal(2), &s).unwrap();
        check_double_expansion(&casimir_dual(2), &s).unwrap();
        // linear input
        let h = Polynomial::variable(VarId::primal(sl_h_index(2, 1), DegVec::zero(2)));
        check_double_expansion(&h, &s).unwrap();
        // degenerate last factor
        let s0 = Staircase::from_box(&DegVec(vec![1, 0]));
        check_double_expansion(&casimir_primal(2), &s0).unwrap();
    }

    #[test]
    fn positive_degree_support_box() {
        let s = Staircase::from_box(&DegVec(vec![1]));
        let fam = InvariantFamily::expand_seed(1, casimir_primal(1), &s).unwrap();
        positive_degree_support(std::slice::from_ref(&fam), &s).unwrap();

        let s0 = Staircase::from_box(&DegVec(vec![0]));
        let fam0 = InvariantFamily::expand_seed(1, casimir_primal(1), &s0).unwrap();
        assert!(matches!(
            positive_degree_support(&[fam0], &s0),
            Err(InvariantError::Precondition(_))
        ));
        // dual families are rejected
        let famd = InvariantFamily::expand_seed(1, casimir_dual(1), &s).unwrap();
        assert!(matches!(
            positive_degree_support(&[famd], &s),
            Err(InvariantError::PictureMismatch)
        ));
    }

    #[test]
    fn dualize_matches_dual_family_exactly() {
        let mca = sl2_mca(&[1]);
        let s = mca.staircase().clone();
        let kappa = mca.base().killing_form();
        let rho_fam = InvariantFamily::expand_seed(1, casimir_primal(1), &s).unwrap();
        let p_fam = InvariantFamily::expand_seed(1, casimir_dual(1), &s).unwrap();
        let dualized = dualize(&rho_fam, &kappa, &mca).unwrap();
        assert_eq!(proportionality(&dualized, &p_fam).unwrap(), rat_int(1));

        // linearity in the input
        let scaled =
            InvariantFamily::expand_seed(1, casimir_primal(1).scale(&rat(5, 3)), &s).unwrap();
        let dualized_scaled = dualize(&scaled, &kappa, &mca).unwrap();
        assert_eq!(
            proportionality(&p_fam, &dualized_scaled).unwrap(),
            rat(5, 3)
        );
    }

    #[test]
    fn dualize_on_trivial_staircase_is_killing_transport() {
        let mca = sl2_mca(&[0]);
        let s = mca.staircase().clone();
        let kappa = mca.base().killing_form();
        let rho_fam = InvariantFamily::expand_seed(1, casimir_primal(1), &s).unwrap();
        let dualized = dualize(&rho_fam, &kappa, &mca).unwrap();
        let p_fam = InvariantFamily::expand_seed(1, casimir_dual(1), &s).unwrap();
        assert_eq!(proportionality(&dualized, &p_fam).unwrap(), rat_int(1));
    }

    #[test]
    fn product_components_are_polynomial_in_factor_components() {
        // expanding ρ² gives components assembled from the components of ρ
        let s = Staircase::from_box(&DegVec(vec![1]));
        let rho = casimir_primal(1);
        let rho_comps = expand(&rho, &s).unwrap();
        let sq_comps = expand(&rho.pow(2), &s).unwrap();
        for omega in 0..=1i64 {
            let target = DegVec(vec![4 - omega]);
            let mut assembled = Polynomial::zero();
            for d in 0..=omega {
                let a = &rho_comps[&DegVec(vec![2 - d])];
                let b = &rho_comps[&DegVec(vec![2 - omega + d])];
                assembled = &assembled + &(a * b);
            }
            assert_eq!(sq_comps[&target], assembled);
        }
    }
}
