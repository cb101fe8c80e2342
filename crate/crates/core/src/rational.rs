//! Exact rational scalars.
//!
//! Coefficients are arbitrary-precision rationals, always in lowest terms
//! with a positive denominator (`num_rational::BigRational` maintains both).
//! Zero is represented as `0/1`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub type Rational = num_rational::BigRational;

/// Rational from an integer pair; panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Rational from an integer.
pub fn rat_int(num: i64) -> Rational {
    Rational::from_integer(BigInt::from(num))
}

/// Renders `p/q` in lowest terms, omitting the denominator when it is 1.
pub fn rat_to_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"p"` or `"p/q"` with optional sign.
pub fn rat_from_str(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| format!("invalid rational numerator: {s:?}"))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| format!("invalid rational denominator: {s:?}"))?;
    if d.is_zero() {
        return Err(format!("zero denominator in rational: {s:?}"));
    }
    Ok(Rational::new(n, d))
}

/// True when `r` is a nonnegative integer.
pub fn is_nonneg_integer(r: &Rational) -> bool {
    r.denom().is_one() && !r.numer().is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_terms_and_positive_denominator() {
        let r = rat(2, -4);
        assert_eq!(rat_to_string(&r), "-1/2");
        assert_eq!(rat(0, 5), rat_int(0));
        assert!(rat(0, 5).denom().is_one());
    }

    #[test]
    fn parse_round_trip() {
        for s in ["0", "7", "-3/4", "22/7"] {
            let r = rat_from_str(s).unwrap();
            assert_eq!(rat_to_string(&r), s);
        }
        assert_eq!(rat_from_str("4/6").unwrap(), rat(2, 3));
        assert!(rat_from_str("1/0").is_err());
        assert!(rat_from_str("x").is_err());
    }
}
