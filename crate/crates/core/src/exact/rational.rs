use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("`{0}` is a decimal; write exact values as fractions such as \"1/2\"")]
    Decimal(String),
    #[error("`{0}` is not a rational of the form p or p/q")]
    Malformed(String),
    #[error("`{0}` has a zero denominator")]
    ZeroDenominator(String),
}

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Parses `"p"` or `"p/q"` exactly. Decimal and exponent notation are
/// rejected outright rather than rounded.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let s = text.trim();
    if s.contains(['.', 'e', 'E']) {
        return Err(ParseRationalError::Decimal(text.to_string()));
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let malformed = || ParseRationalError::Malformed(text.to_string());
    if num.is_empty() || den.is_empty() {
        return Err(malformed());
    }
    let num = BigInt::from_str(num).map_err(|_| malformed())?;
    let den = BigInt::from_str(den).map_err(|_| malformed())?;
    if den.is_zero() {
        return Err(ParseRationalError::ZeroDenominator(text.to_string()));
    }
    Ok(Rational::new(num, den))
}

/// Returns the exact square root when `q` is the square of a rational.
pub fn rational_sqrt(q: &Rational) -> Option<Rational> {
    if q < &Rational::zero() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

pub fn is_integer(q: &Rational) -> bool {
    q.denom().is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_in_lowest_terms() {
        assert_eq!(parse_rational("6/4").unwrap(), rat(3, 2));
        assert_eq!(parse_rational(" -7 ").unwrap(), int(-7));
        assert_eq!(parse_rational("3/-6").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("3/-6").unwrap().to_string(), "-1/2");
    }

    #[test]
    fn rejects_decimals_and_garbage() {
        assert!(matches!(
            parse_rational("0.5"),
            Err(ParseRationalError::Decimal(_))
        ));
        assert!(matches!(
            parse_rational("1e3"),
            Err(ParseRationalError::Decimal(_))
        ));
        assert!(matches!(
            parse_rational("1/0"),
            Err(ParseRationalError::ZeroDenominator(_))
        ));
        assert!(matches!(
            parse_rational("x/2"),
            Err(ParseRationalError::Malformed(_))
        ));
        assert!(matches!(
            parse_rational("/2"),
            Err(ParseRationalError::Malformed(_))
        ));
    }

    #[test]
    fn exact_square_roots() {
        assert_eq!(rational_sqrt(&rat(9, 4)), Some(rat(3, 2)));
        assert_eq!(rational_sqrt(&int(2)), None);
        assert_eq!(rational_sqrt(&int(-4)), None);
        assert_eq!(rational_sqrt(&zero()), Some(zero()));
    }
}
