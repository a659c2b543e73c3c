//! Exact rational numbers and their `p/q` text form.

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};

pub type Rational = num_rational::BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Formats a rational as `p/q`, always with an explicit denominator.
pub fn format_rational(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed rational `{0}`: expected `p/q` or an integer")]
pub struct ParseRationalError(pub String);

/// Parses `p/q` or a bare integer `p`. Zero denominators are rejected.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    let text = text.trim();
    let (numer, denom) = match text.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (text, "1"),
    };
    let numer = BigInt::from_str(numer).map_err(|_| err())?;
    let denom = BigInt::from_str(denom).map_err(|_| err())?;
    if denom.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(numer, denom))
}

pub fn factorial(k: usize) -> BigInt {
    (2..=k).fold(BigInt::one(), |acc, x| acc * BigInt::from(x))
}

/// Smallest integer not below `value`.
pub fn ceil_to_int(value: &Rational) -> BigInt {
    value.ceil().to_integer()
}
