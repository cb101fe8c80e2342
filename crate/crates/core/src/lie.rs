//! Finite-dimensional Lie algebras over the rationals, given by structure
//! constants.
//!
//! Antisymmetry and the Jacobi identity are verified at construction time;
//! a violation reports the offending basis triple.  The special linear
//! algebras ship with a Chevalley-style basis, their matrix realization,
//! and a built-in principal sl2-triple; everything else is user-supplied.

use crate::degree::DegVec;
use crate::linalg::QMatrix;
use crate::poly::{Polynomial, VarId};
use crate::rational::{rat_from_str, rat_int, rat_to_string, Rational};
use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Default number of random forms sampled by the index estimator.
pub const INDEX_SAMPLES: usize = 8;
/// Default seed for the index estimator.
pub const INDEX_SEED: u64 = 0;
/// Random integer coefficients are drawn uniformly from this symmetric range.
pub const SAMPLE_COEFF_BOUND: i64 = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LieError {
    #[error("antisymmetry violated at basis pair ({i}, {j}), component {k}")]
    Antisymmetry { i: usize, j: usize, k: usize },
    #[error("Jacobi identity violated at basis triple ({i}, {j}, {k})")]
    Jacobi { i: usize, j: usize, k: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArg(String),
    #[error("no built-in principal sl2-triple for this algebra; supply one")]
    UnsupportedAlgebra,
    #[error("invalid sl2 triple: {0}")]
    InvalidTriple(String),
    #[error("invalid Lie algebra JSON: {0}")]
    InvalidJson(String),
}

/// A principal sl2-triple `(x₊, x₋, h)` in coordinates.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Sl2Triple {
    pub x_plus: Vec<Rational>,
    pub x_minus: Vec<Rational>,
    pub h: Vec<Rational>,
}

impl Sl2Triple {
    pub fn to_json(&self) -> serde_json::Value {
        let row = |v: &[Rational]| v.iter().map(rat_to_string).collect::<Vec<_>>();
        serde_json::json!({
            "x_plus": row(&self.x_plus),
            "x_minus": row(&self.x_minus),
            "h": row(&self.h),
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, LieError> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct TripleJson {
            x_plus: Vec<String>,
            x_minus: Vec<String>,
            h: Vec<String>,
        }
        let t: TripleJson = serde_json::from_value(value.clone())
            .map_err(|e| LieError::InvalidJson(e.to_string()))?;
        let parse = |v: Vec<String>| -> Result<Vec<Rational>, LieError> {
            v.iter()
                .map(|s| rat_from_str(s).map_err(LieError::InvalidJson))
                .collect()
        };
        Ok(Sl2Triple {
            x_plus: parse(t.x_plus)?,
            x_minus: parse(t.x_minus)?,
            h: parse(t.h)?,
        })
    }
}

#[derive(Clone, Debug)]
pub struct LieAlgebra {
    dim: usize,
    /// `[b_i, b_j] = Σ_k c[i][j][k] b_k`
    c: Vec<Vec<Vec<Rational>>>,
    labels: Vec<String>,
    rank_hint: Option<usize>,
    /// `Some(n)` when this is `sl_n` in the canonical basis below.
    sl_n: Option<usize>,
}

impl LieAlgebra {
    /// `sl_n` in the basis `E_ij (i ≠ j, lexicographic)` followed by
    /// `H_i = E_ii − E_{i+1,i+1}`; structure constants come from matrix
    /// commutators.
    pub fn sl_n_chevalley(n: usize) -> Result<Self, LieError> {
        if n < 2 {
            return Err(LieError::InvalidArg(format!(
                "sl_n requires n >= 2, got {n}"
            )));
        }
        let dim = n * n - 1;
        let mats = sl_basis_matrices(n);
        let labels = sl_basis_labels(n);
        let mut c = vec![vec![vec![Rational::zero(); dim]; dim]; dim];
        for i in 0..dim {
            for j in 0..dim {
                let comm = mats[i].matmul(&mats[j]).sub(&mats[j].matmul(&mats[i]));
                let coords = sl_coords_of(n, &comm);
                c[i][j] = coords;
            }
        }
        let g = LieAlgebra {
            dim,
            c,
            labels,
            rank_hint: Some(n - 1),
            sl_n: Some(n),
        };
        g.check_brackets()?;
        Ok(g)
    }

    /// Builds and validates an algebra from raw structure constants.
    pub fn from_structure_constants(
        c: Vec<Vec<Vec<Rational>>>,
        labels: Option<Vec<String>>,
        rank_hint: Option<usize>,
    ) -> Result<Self, LieError> {
        let dim = c.len();
        for row in &c {
            if row.len() != dim {
                return Err(LieError::DimMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            for entry in row {
                if entry.len() != dim {
                    return Err(LieError::DimMismatch {
                        expected: dim,
                        got: entry.len(),
                    });
                }
            }
        }
        let labels = match labels {
            Some(l) if l.len() == dim => l,
            Some(l) => {
                return Err(LieError::DimMismatch {
                    expected: dim,
                    got: l.len(),
                })
            }
            None => (0..dim).map(|i| format!("b{i}")).collect(),
        };
        let g = LieAlgebra {
            dim,
            c,
            labels,
            rank_hint,
            sl_n: None,
        };
        g.check_brackets()?;
        Ok(g)
    }

    fn check_brackets(&self) -> Result<(), LieError> {
        for i in 0..self.dim {
            for j in 0..=i {
                for k in 0..self.dim {
                    if self.c[i][j][k] != -self.c[j][i][k].clone() {
                        return Err(LieError::Antisymmetry { i, j, k });
                    }
                }
            }
        }
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                for k in (j + 1)..self.dim {
                    let a = self.bracket_basis(i, j);
                    let ab = self.bracket(&a, &basis_vector(self.dim, k)).unwrap();
                    let b = self.bracket_basis(j, k);
                    let bc = self.bracket(&b, &basis_vector(self.dim, i)).unwrap();
                    let cc = self.bracket_basis(k, i);
                    let ca = self.bracket(&cc, &basis_vector(self.dim, j)).unwrap();
                    // [[i,j],k] + [[j,k],i] + [[k,i],j] = 0
                    for t in 0..self.dim {
                        if !(&ab[t] + &bc[t] + &ca[t]).is_zero() {
                            return Err(LieError::Jacobi { i, j, k });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rank_hint(&self) -> Option<usize> {
        self.rank_hint
    }

    pub fn sl_n(&self) -> Option<usize> {
        self.sl_n
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> &Rational {
        &self.c[i][j][k]
    }

    fn bracket_basis(&self, i: usize, j: usize) -> Vec<Rational> {
        self.c[i][j].clone()
    }

    /// Bilinear bracket of coordinate vectors.
    pub fn bracket(&self, x: &[Rational], y: &[Rational]) -> Result<Vec<Rational>, LieError> {
        if x.len() != self.dim {
            return Err(LieError::DimMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if y.len() != self.dim {
            return Err(LieError::DimMismatch {
                expected: self.dim,
                got: y.len(),
            });
        }
        let mut out = vec![Rational::zero(); self.dim];
        for i in 0..self.dim {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..self.dim {
                if y[j].is_zero() {
                    continue;
                }
                let f = &x[i] * &y[j];
                for k in 0..self.dim {
                    if !self.c[i][j][k].is_zero() {
                        out[k] += &f * &self.c[i][j][k];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Matrix of `ad(x)` in the basis: column `j` is `[x, b_j]`.
    pub fn ad_matrix(&self, x: &[Rational]) -> QMatrix {
        let mut m = QMatrix::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            let col = self.bracket(x, &basis_vector(self.dim, j)).unwrap();
            for (k, val) in col.into_iter().enumerate() {
                m[(k, j)] = val;
            }
        }
        m
    }

    /// Killing form `κ(b_i, b_j) = tr(ad b_i ∘ ad b_j)`.
    pub fn killing_form(&self) -> QMatrix {
        QMatrix::from_fn(self.dim, self.dim, |i, j| {
            let mut acc = Rational::zero();
            for k in 0..self.dim {
                for m in 0..self.dim {
                    acc += &self.c[i][m][k] * &self.c[j][k][m];
                }
            }
            acc
        })
    }

    /// Exact basis of the centralizer `{y : [x, y] = 0}`.
    pub fn centralizer(&self, x: &[Rational]) -> Vec<Vec<Rational>> {
        self.ad_matrix(x).kernel_basis()
    }

    /// Kernel dimension of the skew form `B_f(b_i, b_j) = f([b_i, b_j])`.
    pub fn form_stabilizer_dim(&self, f: &[Rational]) -> usize {
        let b = QMatrix::from_fn(self.dim, self.dim, |i, j| {
            (0..self.dim).map(|k| &self.c[i][j][k] * &f[k]).sum()
        });
        self.dim - b.rank()
    }

    /// Monte-Carlo index: the minimum stabilizer dimension over `samples`
    /// random integer forms.  Always an upper bound for the true index and
    /// equal to it with overwhelming probability; deterministic per seed.
    pub fn index_sampled(&self, samples: usize, seed: u64) -> usize {
        assert!(samples >= 1, "index sampling needs at least one form");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best = self.dim;
        for _ in 0..samples {
            let f = random_int_vector(&mut rng, self.dim);
            best = best.min(self.form_stabilizer_dim(&f));
        }
        best
    }

    pub fn index(&self) -> usize {
        self.index_sampled(INDEX_SAMPLES, INDEX_SEED)
    }

    /// Whether `f` is a regular linear form (minimal stabilizer dimension).
    pub fn is_regular_form(&self, f: &[Rational]) -> bool {
        self.form_stabilizer_dim(f) == self.index()
    }

    /// Whether `x` is a regular element (minimal centralizer dimension).
    pub fn is_regular_element(&self, x: &[Rational]) -> bool {
        self.centralizer(x).len() == self.index()
    }

    /// The canonical principal sl2-triple of `sl_n`:
    /// `x₊ = Σ E_{i,i+1}`, `h = diag(n−1, n−3, …, 1−n)`,
    /// `x₋ = Σ i(n−i) E_{i+1,i}`.
    pub fn principal_sl2_triple(&self) -> Result<Sl2Triple, LieError> {
        let n = self.sl_n.ok_or(LieError::UnsupportedAlgebra)?;
        let mut x_plus = vec![Rational::zero(); self.dim];
        let mut x_minus = vec![Rational::zero(); self.dim];
        let mut h = vec![Rational::zero(); self.dim];
        for i in 1..n {
            x_plus[sl_e_index(n, i, i + 1)] = Rational::one();
            let coeff = (i * (n - i)) as i64;
            x_minus[sl_e_index(n, i + 1, i)] = rat_int(coeff);
            h[sl_h_index(n, i)] = rat_int(coeff);
        }
        let t = Sl2Triple { x_plus, x_minus, h };
        self.validate_sl2_triple(&t)?;
        Ok(t)
    }

    /// Checks the sl2 relations and regularity of all three members.
    pub fn validate_sl2_triple(&self, t: &Sl2Triple) -> Result<(), LieError> {
        let scale = |v: &[Rational], c: i64| v.iter().map(|a| a * rat_int(c)).collect::<Vec<_>>();
        if self.bracket(&t.h, &t.x_plus)? != scale(&t.x_plus, 2) {
            return Err(LieError::InvalidTriple("[h, x+] != 2 x+".into()));
        }
        if self.bracket(&t.h, &t.x_minus)? != scale(&t.x_minus, -2) {
            return Err(LieError::InvalidTriple("[h, x-] != -2 x-".into()));
        }
        if self.bracket(&t.x_plus, &t.x_minus)? != t.h {
            return Err(LieError::InvalidTriple("[x+, x-] != h".into()));
        }
        let idx = self.rank_hint.unwrap_or_else(|| self.index());
        for (name, v) in [("x+", &t.x_plus), ("x-", &t.x_minus), ("h", &t.h)] {
            let cdim = self.centralizer(v).len();
            if cdim != idx {
                return Err(LieError::InvalidTriple(format!(
                    "{name} is not regular: centralizer dimension {cdim}, index {idx}"
                )));
            }
        }
        Ok(())
    }

    /// Matrix realization of a coordinate vector (sl_n only).
    pub fn matrix_of(&self, x: &[Rational]) -> Result<QMatrix, LieError> {
        let n = self.sl_n.ok_or(LieError::UnsupportedAlgebra)?;
        let mats = sl_basis_matrices(n);
        let mut m = QMatrix::zeros(n, n);
        for (i, coeff) in x.iter().enumerate() {
            if !coeff.is_zero() {
                m = m.add(&mats[i].scale(coeff));
            }
        }
        Ok(m)
    }

    /// Coordinates of a traceless matrix in the canonical basis (sl_n only).
    pub fn coords_of(&self, m: &QMatrix) -> Result<Vec<Rational>, LieError> {
        let n = self.sl_n.ok_or(LieError::UnsupportedAlgebra)?;
        let trace = m.trace();
        if !trace.is_zero() {
            return Err(LieError::InvalidArg(format!(
                "matrix has nonzero trace {trace}"
            )));
        }
        Ok(sl_coords_of(n, m))
    }

    /// Coefficients of the characteristic polynomial of the generic traceless
    /// matrix, as invariant polynomials on `g` in dual coordinates (sl_n
    /// only).  Returns `e_2, …, e_n`, where `e_k` is homogeneous of degree
    /// `k`; degree vectors of the variables have length `ell`.
    pub fn char_coefficient_invariants(&self, ell: usize) -> Result<Vec<Polynomial>, LieError> {
        let n = self.sl_n.ok_or(LieError::UnsupportedAlgebra)?;
        let mats = sl_basis_matrices(n);
        // generic element: entries are linear polynomials in the dual variables
        let mut generic = vec![vec![Polynomial::zero(); n]; n];
        for (i, mat) in mats.iter().enumerate() {
            let var = Polynomial::variable(VarId::dual(i, DegVec::zero(ell)));
            for r in 0..n {
                for c in 0..n {
                    if !mat[(r, c)].is_zero() {
                        generic[r][c] = &generic[r][c] + &var.scale(&mat[(r, c)]);
                    }
                }
            }
        }
        // power sums p_m = tr(M^m), then Newton's identities
        let mut power = generic.clone();
        let mut power_sums = vec![poly_matrix_trace(&generic)];
        for _ in 2..=n {
            power = poly_matrix_mul(&power, &generic);
            power_sums.push(poly_matrix_trace(&power));
        }
        let mut e = vec![Polynomial::one()];
        for k in 1..=n {
            let mut acc = Polynomial::zero();
            for i in 1..=k {
                let term = &e[k - i] * &power_sums[i - 1];
                if i % 2 == 1 {
                    acc = &acc + &term;
                } else {
                    acc = &acc - &term;
                }
            }
            e.push(acc.scale(&(Rational::one() / rat_int(k as i64))));
        }
        debug_assert!(e[1].is_zero(), "generic sl_n element must be traceless");
        Ok(e.into_iter().skip(2).collect())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut brackets = Vec::new();
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                let coeffs: BTreeMap<String, String> = self.c[i][j]
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(k, v)| (k.to_string(), rat_to_string(v)))
                    .collect();
                if !coeffs.is_empty() {
                    brackets.push(serde_json::json!({ "i": i, "j": j, "coeffs": coeffs }));
                }
            }
        }
        serde_json::json!({ "dim": self.dim, "labels": self.labels, "brackets": brackets })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, LieError> {
        let spec: StructureConstantsJson = serde_json::from_value(value.clone())
            .map_err(|e| LieError::InvalidJson(e.to_string()))?;
        spec.build()
    }
}

/// Wire format for structure constants.  Brackets are listed for `i < j`
/// with sparse coefficient maps; antisymmetry fills in the rest.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureConstantsJson {
    pub dim: usize,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
    pub brackets: Vec<BracketJson>,
    #[serde(default)]
    pub rank_hint: Option<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketJson {
    pub i: usize,
    pub j: usize,
    pub coeffs: BTreeMap<String, String>,
}

impl StructureConstantsJson {
    pub fn build(&self) -> Result<LieAlgebra, LieError> {
        let dim = self.dim;
        let mut c = vec![vec![vec![Rational::zero(); dim]; dim]; dim];
        for b in &self.brackets {
            if b.i >= dim || b.j >= dim {
                return Err(LieError::InvalidJson(format!(
                    "bracket index ({}, {}) out of range for dim {dim}",
                    b.i, b.j
                )));
            }
            for (k, v) in &b.coeffs {
                let k: usize = k
                    .parse()
                    .map_err(|_| LieError::InvalidJson(format!("bad component index {k:?}")))?;
                if k >= dim {
                    return Err(LieError::InvalidJson(format!(
                        "component index {k} out of range for dim {dim}"
                    )));
                }
                let val = rat_from_str(v).map_err(LieError::InvalidJson)?;
                c[b.i][b.j][k] = val.clone();
                c[b.j][b.i][k] = -val;
            }
        }
        LieAlgebra::from_structure_constants(c, self.labels.clone(), self.rank_hint)
    }
}

pub fn basis_vector(dim: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); dim];
    v[i] = Rational::one();
    v
}

pub fn random_int_vector(rng: &mut ChaCha8Rng, len: usize) -> Vec<Rational> {
    (0..len)
        .map(|_| rat_int(rng.gen_range(-SAMPLE_COEFF_BOUND..=SAMPLE_COEFF_BOUND)))
        .collect()
}

/// Basis index of `E_{rc}` (1-based matrix positions, `r != c`).
pub fn sl_e_index(n: usize, r: usize, c: usize) -> usize {
    assert!(r != c && 1 <= r && r <= n && 1 <= c && c <= n);
    let mut idx = 0;
    for i in 1..=n {
        for j in 1..=n {
            if i == j {
                continue;
            }
            if (i, j) == (r, c) {
                return idx;
            }
            idx += 1;
        }
    }
    unreachable!()
}

/// Basis index of `H_i = E_ii − E_{i+1,i+1}` (1-based, `1 <= i <= n−1`).
pub fn sl_h_index(n: usize, i: usize) -> usize {
    assert!(1 <= i && i < n);
    n * (n - 1) + i - 1
}

fn sl_basis_labels(n: usize) -> Vec<String> {
    let mut labels = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            if i != j {
                labels.push(format!("E{i}{j}"));
            }
        }
    }
    for i in 1..n {
        labels.push(format!("H{i}"));
    }
    labels
}

fn sl_basis_matrices(n: usize) -> Vec<QMatrix> {
    let mut mats = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            if i == j {
                continue;
            }
            let mut m = QMatrix::zeros(n, n);
            m[(i - 1, j - 1)] = Rational::one();
            mats.push(m);
        }
    }
    for i in 1..n {
        let mut m = QMatrix::zeros(n, n);
        m[(i - 1, i - 1)] = Rational::one();
        m[(i, i)] = -Rational::one();
        mats.push(m);
    }
    mats
}

/// Expansion of a traceless matrix in the canonical `sl_n` basis: the
/// off-diagonal entries feed the `E_ij`, and the diagonal decomposes over
/// the `H_i` with coefficients given by partial sums.
fn sl_coords_of(n: usize, m: &QMatrix) -> Vec<Rational> {
    let dim = n * n - 1;
    let mut coords = vec![Rational::zero(); dim];
    let mut idx = 0;
    for i in 1..=n {
        for j in 1..=n {
            if i != j {
                coords[idx] = m[(i - 1, j - 1)].clone();
                idx += 1;
            }
        }
    }
    let mut partial = Rational::zero();
    for i in 1..n {
        partial += m[(i - 1, i - 1)].clone();
        coords[sl_h_index(n, i)] = partial.clone();
    }
    coords
}

fn poly_matrix_mul(a: &[Vec<Polynomial>], b: &[Vec<Polynomial>]) -> Vec<Vec<Polynomial>> {
    let n = a.len();
    let mut out = vec![vec![Polynomial::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = Polynomial::zero();
            for k in 0..n {
                acc = &acc + &(&a[i][k] * &b[k][j]);
            }
            out[i][j] = acc;
        }
    }
    out
}

fn poly_matrix_trace(a: &[Vec<Polynomial>]) -> Polynomial {
    let mut acc = Polynomial::zero();
    for (i, row) in a.iter().enumerate() {
        acc = &acc + &row[i];
    }
    acc
}
