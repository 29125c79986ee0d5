//! Exact rationals and the extended value type `ℝ ∪ {+∞}`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::Error;

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Formats a rational as `n` when integral, `n/d` otherwise.
pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Always `n/d`, used for weights in the canonical measure format.
pub fn fmt_fraction(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `n`, `n/d` or a finite decimal such as `-0.25`.
pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        let whole_val = if whole_digits.is_empty() {
            BigInt::zero()
        } else {
            BigInt::from_str(whole_digits).map_err(|_| bad())?
        };
        let frac_val = BigInt::from_str(frac).map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let mag = Rational::new(whole_val * &scale + frac_val, scale);
        return Ok(if negative { -mag } else { mag });
    }
    BigInt::from_str(s)
        .map(Rational::from_integer)
        .map_err(|_| bad())
}

/// A value of the extended line `ℚ ∪ {+∞}`.
///
/// Addition and scaling absorb `∞`, with the measure-theoretic convention
/// `0 · ∞ = 0`. The derived order places every finite value below `∞`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtValue {
    Finite(Rational),
    Infinity,
}

impl ExtValue {
    pub fn zero() -> Self {
        ExtValue::Finite(Rational::zero())
    }

    pub fn finite(r: Rational) -> Self {
        ExtValue::Finite(r)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtValue::Infinity)
    }

    pub fn as_finite(&self) -> Option<&Rational> {
        match self {
            ExtValue::Finite(r) => Some(r),
            ExtValue::Infinity => None,
        }
    }

    /// `c · self` for a nonnegative rational `c`.
    pub fn scale(&self, c: &Rational) -> ExtValue {
        debug_assert!(!c.is_negative());
        match self {
            ExtValue::Finite(v) => ExtValue::Finite(v * c),
            ExtValue::Infinity if c.is_zero() => ExtValue::zero(),
            ExtValue::Infinity => ExtValue::Infinity,
        }
    }

    /// `|a - b|` on the extended line: `∞` against a finite value, `0` between two infinities.
    pub fn abs_diff(&self, other: &ExtValue) -> ExtValue {
        match (self, other) {
            (ExtValue::Finite(a), ExtValue::Finite(b)) => ExtValue::Finite((a - b).abs()),
            (ExtValue::Infinity, ExtValue::Infinity) => ExtValue::zero(),
            _ => ExtValue::Infinity,
        }
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "inf" | "∞" | "+inf" => Ok(ExtValue::Infinity),
            other => parse_rational(other).map(ExtValue::Finite),
        }
    }
}

impl fmt::Display for ExtValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtValue::Finite(r) => f.write_str(&fmt_rational(r)),
            ExtValue::Infinity => f.write_str("inf"),
        }
    }
}

impl Add for &ExtValue {
    type Output = ExtValue;
    fn add(self, rhs: &ExtValue) -> ExtValue {
        match (self, rhs) {
            (ExtValue::Finite(a), ExtValue::Finite(b)) => ExtValue::Finite(a + b),
            _ => ExtValue::Infinity,
        }
    }
}

impl Add for ExtValue {
    type Output = ExtValue;
    fn add(self, rhs: ExtValue) -> ExtValue {
        &self + &rhs
    }
}

impl Mul<&Rational> for &ExtValue {
    type Output = ExtValue;
    fn mul(self, rhs: &Rational) -> ExtValue {
        self.scale(rhs)
    }
}

impl std::iter::Sum for ExtValue {
    fn sum<I: Iterator<Item = ExtValue>>(iter: I) -> Self {
        iter.fold(ExtValue::zero(), |acc, v| acc + v)
    }
}

impl From<Rational> for ExtValue {
    fn from(r: Rational) -> Self {
        ExtValue::Finite(r)
    }
}

/// Compares an extended value to a rational.
pub fn cmp_ext_rat(a: &ExtValue, b: &Rational) -> Ordering {
    match a {
        ExtValue::Finite(x) => x.cmp(b),
        ExtValue::Infinity => Ordering::Greater,
    }
}
