//! Exact rational numbers used for every position, speed, length and duration.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational literal `{0}`")]
pub struct RationalParseError(pub String);

/// Integer as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `num / den`; panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn half() -> Rational {
    ratio(1, 2)
}

/// Parses `p/q`, a plain integer, or a decimal literal such as `-3.25`.
pub fn parse(text: &str) -> Result<Rational, RationalParseError> {
    let s = text.trim();
    let err = || RationalParseError(text.to_string());
    if s.is_empty() {
        return Err(err());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| err())?;
        let q: BigInt = q.trim().parse().map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(p, q));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (whole, frac) = match body.split_once('.') {
        Some((w, f)) => (w, f),
        None => (body, ""),
    };
    if (whole.is_empty() && frac.is_empty())
        || !whole.chars().all(|c| c.is_ascii_digit())
        || !frac.chars().all(|c| c.is_ascii_digit())
    {
        return Err(err());
    }
    let digits = format!("{whole}{frac}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| err())? };
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    let value = Rational::new(numer, denom);
    Ok(if negative { -value } else { value })
}

/// Canonical text form: `n` for integers, `p/q` otherwise.
pub fn format(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Wrapper that displays a rational in canonical form.
pub struct Show<'a>(pub &'a Rational);

impl fmt::Display for Show<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format(self.0))
    }
}

pub fn is_natural(q: &Rational) -> bool {
    q.is_integer() && !q.is_negative()
}

pub fn one() -> Rational {
    Rational::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_literal_forms() {
        assert_eq!(parse("7/2").unwrap(), ratio(7, 2));
        assert_eq!(parse("3.5").unwrap(), ratio(7, 2));
        assert_eq!(parse("11.5").unwrap(), ratio(23, 2));
        assert_eq!(parse("-0.25").unwrap(), ratio(-1, 4));
        assert_eq!(parse("42").unwrap(), int(42));
        assert_eq!(parse(".5").unwrap(), half());
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
        assert!(parse("").is_err());
        assert!(parse(".").is_err());
    }

    #[test]
    fn formats_canonically() {
        assert_eq!(format(&ratio(6, 4)), "3/2");
        assert_eq!(format(&int(-3)), "-3");
        assert_eq!(format(&parse("2.50").unwrap()), "5/2");
    }
}
