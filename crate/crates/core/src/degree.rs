//! Fixed-length integer degree vectors.
//!
//! Elements of the grading group `Z^ℓ` and of the exponent monoid `N^ℓ` are
//! both represented as [`DegVec`]; staircase code enforces nonnegativity
//! where the monoid is meant.  The derived `Ord` is lexicographic, which is
//! the tie-break order used throughout for canonical iteration.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DegVec(pub Vec<i64>);

impl DegVec {
    pub fn zero(ell: usize) -> Self {
        DegVec(vec![0; ell])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, other: &DegVec) -> DegVec {
        assert_eq!(self.len(), other.len(), "degree length mismatch");
        DegVec(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &DegVec) -> DegVec {
        assert_eq!(self.len(), other.len(), "degree length mismatch");
        DegVec(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> DegVec {
        DegVec(self.0.iter().map(|a| -a).collect())
    }

    pub fn scale(&self, k: i64) -> DegVec {
        DegVec(self.0.iter().map(|a| a * k).collect())
    }

    /// Componentwise partial order `self ≤ other`.
    pub fn leq(&self, other: &DegVec) -> bool {
        self.len() == other.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    pub fn is_nonneg(&self) -> bool {
        self.0.iter().all(|&a| a >= 0)
    }

    /// Strictly positive in the partial order: nonnegative and nonzero.
    pub fn is_positive(&self) -> bool {
        self.is_nonneg() && !self.is_zero()
    }
}

impl fmt::Display for DegVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<i64>> for DegVec {
    fn from(v: Vec<i64>) -> Self {
        DegVec(v)
    }
}
