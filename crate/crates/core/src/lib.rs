//! Exact-arithmetic invariant theory for truncated multicurrent Lie algebras.
//!
//! A truncated multicurrent algebra is a Lie algebra of the form `g ⊗ A`,
//! where `g` is a finite-dimensional Lie algebra over the rationals and
//! `A = Q[t_1, …, t_ℓ] / I` for a monomial ideal `I` of finite codimension.
//! The surviving monomial exponents form a finite downward-closed set
//! (a [`staircase::Staircase`]).  This crate constructs the families of
//! invariant polynomials on `g ⊗ A` obtained by expanding invariants of `g`
//! along the grading, and provides the machinery needed to certify their
//! properties: exact sparse polynomial arithmetic, structure-constant Lie
//! algebras, graded bilinear forms, index computations, Jacobian independence
//! tests, and the principal-slice orbit reduction.
//!
//! Everything is computed over exact rationals; there are no tolerances.

pub mod degree;
pub mod invariants;
pub mod lie;
pub mod linalg;
pub mod multicurrent;
pub mod poly;
pub mod rational;
pub mod slice;
pub mod staircase;

pub use degree::DegVec;
pub use invariants::{InvariantFamily, Picture};
pub use lie::{LieAlgebra, Sl2Triple};
pub use linalg::QMatrix;
pub use multicurrent::{MCElement, MCForm, MulticurrentAlgebra};
pub use poly::{Monomial, Polynomial, VarId};
pub use rational::Rational;
pub use slice::{PrincipalSlice, TruncatedSlice};
pub use staircase::{DegreeSet, Staircase};
