//! Reduced arbitrary-precision fractions.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::QError;
use crate::numeric::{pow2, scaled_f64};

/// A reduced fraction `numerator / denominator` with positive denominator.
///
/// Zero is stored as `0/1`. Values are immutable; arithmetic returns new
/// values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(BigRational);

impl Rational {
    /// Builds `num / den` in lowest terms.
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self, QError> {
        let den = den.into();
        if den.is_zero() {
            return Err(QError::ZeroDenominator);
        }
        Ok(Rational(BigRational::new(num.into(), den)))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn from_ratio(r: BigRational) -> Self {
        Rational(r)
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    /// Always positive.
    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self, QError> {
        if self.is_zero() {
            Err(QError::ZeroDenominator)
        } else {
            Ok(Rational(self.0.recip()))
        }
    }

    /// Integer power; negative exponents require a nonzero base.
    pub fn pow(&self, e: i32) -> Result<Self, QError> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        Ok(Rational(num_traits::pow(base.0, e.unsigned_abs() as usize)))
    }

    /// Nearest `f64`, correct for numerators and denominators of any size.
    pub fn to_f64(&self) -> f64 {
        let nb = self.numer().bits();
        let db = self.denom().bits();
        let n = scaled_f64(self.numer(), nb);
        let d = scaled_f64(self.denom(), db);
        n / d * pow2(nb as i64 - db as i64)
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Rational, QError> {
        if rhs.is_zero() {
            Err(QError::ZeroDenominator)
        } else {
            Ok(Rational(&self.0 / &rhs.0))
        }
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_integer(n)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

fn parse_int(s: &str, whole: &str) -> Result<BigInt, QError> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(QError::Parse(whole.to_string()));
    }
    s.parse::<BigInt>().map_err(|_| QError::Parse(whole.to_string()))
}

impl FromStr for Rational {
    type Err = QError;

    /// Accepts `a`, `a/b`, `-a/b` and the Unicode minus sign `−`.
    fn from_str(s: &str) -> Result<Self, QError> {
        let t = s.trim();
        let (neg, body) = if let Some(r) = t.strip_prefix('-') {
            (true, r)
        } else if let Some(r) = t.strip_prefix('\u{2212}') {
            (true, r)
        } else {
            (false, t)
        };
        let (num, den) = match body.split_once('/') {
            Some((a, b)) => (parse_int(a.trim(), s)?, parse_int(b.trim(), s)?),
            None => (parse_int(body, s)?, BigInt::one()),
        };
        let num = if neg { -num } else { num };
        Rational::new(num, den)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$m(&rhs.0))
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                Rational(self.0.$m(rhs.0))
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational {
                Rational(self.0.$m(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
// Division by zero panics, as for the underlying ratio type; use
// `checked_div` when the divisor is not known to be nonzero.
forward_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let x: Rational = "-3/4".parse().unwrap();
        assert_eq!(x.to_string(), "-3/4");
        let y: Rational = "\u{2212}6/8".parse().unwrap();
        assert_eq!(y.to_string(), "-3/4");
        assert_eq!("7".parse::<Rational>().unwrap().to_string(), "7");
        assert_eq!("0/5".parse::<Rational>().unwrap(), Rational::zero());
        assert!("1/0".parse::<Rational>().is_err());
        assert!("1.5".parse::<Rational>().is_err());
        assert!("".parse::<Rational>().is_err());
        assert!("--1".parse::<Rational>().is_err());
    }

    #[test]
    fn reduced_with_positive_denominator() {
        let x = Rational::new(6, -4).unwrap();
        assert_eq!(x.numer(), &BigInt::from(-3));
        assert_eq!(x.denom(), &BigInt::from(2));
    }

    #[test]
    fn to_f64_handles_huge_parts() {
        let big = BigInt::from(1) << 3000u32;
        let x = Rational::new(big.clone() * 3, big).unwrap();
        assert_eq!(x.to_f64(), 3.0);
        let y = Rational::new(BigInt::from(1) << 2000u32, (BigInt::from(1) << 2001u32) * 5).unwrap();
        assert!((y.to_f64() - 0.1).abs() < 1e-16);
    }
}
