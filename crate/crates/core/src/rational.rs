//! Exact reduced fractions over 64-bit integers.
//!
//! Every value is stored reduced with a positive denominator, so two rationals
//! are equal exactly when their fields are equal. Arithmetic widens to 128 bits
//! and reports [`ArithError::Overflow`] when a reduced result no longer fits.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::ArithError;

pub fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// A reduced fraction `num/den` with `den >= 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Rational {
    num: i64,
    den: i64,
}

#[derive(Deserialize)]
struct RawRational {
    num: i64,
    den: i64,
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawRational::deserialize(deserializer)?;
        Rational::new(raw.num, raw.den).map_err(serde::de::Error::custom)
    }
}

impl Rational {
    pub const ZERO: Rational = Rational { num: 0, den: 1 };
    pub const ONE: Rational = Rational { num: 1, den: 1 };
    pub const HALF: Rational = Rational { num: 1, den: 2 };

    /// Reduces `num/den`, moving the sign into the numerator.
    pub fn new(num: i64, den: i64) -> Result<Self, ArithError> {
        Self::from_i128(num as i128, den as i128)
    }

    pub fn from_integer(value: i64) -> Self {
        Rational { num: value, den: 1 }
    }

    /// Reduces a fraction given at 128-bit width and narrows it back to 64 bits.
    pub fn from_i128(num: i128, den: i128) -> Result<Self, ArithError> {
        if den == 0 {
            return Err(ArithError::ZeroDenominator);
        }
        let g = gcd_u128(num.unsigned_abs(), den.unsigned_abs()) as i128;
        let (mut num, mut den) = if g > 1 { (num / g, den / g) } else { (num, den) };
        if den < 0 {
            num = num.checked_neg().ok_or(ArithError::Overflow)?;
            den = den.checked_neg().ok_or(ArithError::Overflow)?;
        }
        let num = i64::try_from(num).map_err(|_| ArithError::Overflow)?;
        let den = i64::try_from(den).map_err(|_| ArithError::Overflow)?;
        Ok(Rational { num, den })
    }

    pub fn num(self) -> i64 {
        self.num
    }

    pub fn den(self) -> i64 {
        self.den
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    pub fn is_positive(self) -> bool {
        self.num > 0
    }

    pub fn is_integer(self) -> bool {
        self.den == 1
    }

    pub fn checked_add(self, rhs: Rational) -> Result<Rational, ArithError> {
        let num = self.num as i128 * rhs.den as i128 + rhs.num as i128 * self.den as i128;
        Rational::from_i128(num, self.den as i128 * rhs.den as i128)
    }

    pub fn checked_sub(self, rhs: Rational) -> Result<Rational, ArithError> {
        let num = self.num as i128 * rhs.den as i128 - rhs.num as i128 * self.den as i128;
        Rational::from_i128(num, self.den as i128 * rhs.den as i128)
    }

    pub fn checked_mul(self, rhs: Rational) -> Result<Rational, ArithError> {
        Rational::from_i128(
            self.num as i128 * rhs.num as i128,
            self.den as i128 * rhs.den as i128,
        )
    }

    pub fn checked_div(self, rhs: Rational) -> Result<Rational, ArithError> {
        Rational::from_i128(
            self.num as i128 * rhs.den as i128,
            self.den as i128 * rhs.num as i128,
        )
    }

    pub fn checked_mul_int(self, k: i64) -> Result<Rational, ArithError> {
        Rational::from_i128(self.num as i128 * k as i128, self.den as i128)
    }

    pub fn checked_neg(self) -> Result<Rational, ArithError> {
        Ok(Rational {
            num: self.num.checked_neg().ok_or(ArithError::Overflow)?,
            den: self.den,
        })
    }

    pub fn recip(self) -> Result<Rational, ArithError> {
        Rational::new(self.den, self.num)
    }

    /// Largest integer not exceeding the value.
    pub fn floor(self) -> i64 {
        self.num.div_euclid(self.den)
    }

    /// Smallest integer not below the value.
    pub fn ceil(self) -> i64 {
        -((-(self.num as i128)).div_euclid(self.den as i128)) as i64
    }

    /// The representative of `self mod 1` in `[0, 1)`.
    pub fn fract(self) -> Rational {
        // gcd(num mod den, den) = gcd(num, den) = 1, so this stays reduced.
        Rational { num: self.num.rem_euclid(self.den), den: self.den }
    }

    /// Distance to the nearest integer.
    pub fn circle_norm(self) -> CircleDistance {
        let r = self.num.rem_euclid(self.den);
        CircleDistance(Rational { num: r.min(self.den - r), den: self.den })
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// `||x||`: the distance from `x` to the nearest integer.
pub fn circle_norm(x: Rational) -> CircleDistance {
    x.circle_norm()
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        // Both products fit in i128, so comparison can never overflow.
        (self.num as i128 * other.den as i128).cmp(&(other.num as i128 * self.den as i128))
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::ZERO
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {input:?} as a rational: {reason}")]
pub struct ParseRationalError {
    input: String,
    reason: &'static str,
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    /// Accepts `p/q` or a bare integer.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason| ParseRationalError { input: s.to_string(), reason };
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (s, "1"),
        };
        let num: i64 = num.parse().map_err(|_| err("numerator is not an integer"))?;
        let den: i64 = den.parse().map_err(|_| err("denominator is not an integer"))?;
        Rational::new(num, den).map_err(|e| match e {
            ArithError::ZeroDenominator => err("zero denominator"),
            ArithError::Overflow => err("value does not fit 64 bits"),
        })
    }
}

/// A value of `||x||`, always within `[0, 1/2]`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CircleDistance(Rational);

impl CircleDistance {
    pub fn value(self) -> Rational {
        self.0
    }
}

impl From<CircleDistance> for Rational {
    fn from(d: CircleDistance) -> Rational {
        d.0
    }
}

impl fmt::Display for CircleDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Serde adapter writing a rational as its `"p/q"` text form.
pub mod as_text {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(value)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Like [`as_text`], for optional values (`null` when absent).
pub mod as_text_opt {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Option<Rational>, serializer: S) -> Result<S::Ok, S::Error> {
        match value {
            Some(v) => serializer.collect_str(v),
            None => serializer.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(deserializer)?
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .transpose()
    }
}
