//! The `Per1(lambda)` family `f_t(z) = lambda z / (z^2 + t z + 1)`: exact
//! orbits, the critical-orbit lifts `F_n`, periodic-parameter polynomials
//! and complex roots.

mod fnseq;
mod orbit;
mod roots;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::polyforms::PolyError;
use crate::qfield::{QError, Rational};

pub use fnseq::{build_fn, periodic_parameter_poly, FnEntry, FnSequence, NewtonData, MAX_TOTAL_BITS};
pub use orbit::{
    critical_orbit, f_apply, f_apply_point, MapLift, OrbitOptions, OrbitReport, OrbitStatus, ProjPoint,
};
pub use roots::{complex_roots, ParameterSet, PolyTarget, Root, RootOptions, RootTarget};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Per1Error {
    #[error("lambda must not be 0, 1 or -1 (got {0})")]
    InvalidLambda(String),
    #[error("n_max must be at least 1")]
    InvalidDepth,
    #[error("level {0} not available (sequence built to {1})")]
    LevelUnavailable(usize, usize),
    #[error("coefficient storage would exceed {0} bits")]
    MemoryGuard(u64),
    #[error("periodic-parameter polynomial vanishes identically")]
    ZeroPolynomial,
    #[error("sequence data violate the lift identity at level {0}")]
    Inconsistent(usize),
    #[error("root finder did not converge: {converged} of {degree} roots certified")]
    NoConvergence { degree: usize, converged: usize, partial: Vec<Root> },
    #[error("root finding needs a polynomial of degree at least 1")]
    ConstantPolynomial,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Q(#[from] QError),
}

/// The multiplier of the fixed point at `0`; a rational other than `0, ±1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lambda(Rational);

impl Lambda {
    pub fn new(value: Rational) -> Result<Self, Per1Error> {
        let v = value.numer().abs();
        if value.is_zero() || (value.is_integer() && v.is_one()) {
            return Err(Per1Error::InvalidLambda(value.to_string()));
        }
        Ok(Lambda(value))
    }

    pub fn from_i64(v: i64) -> Result<Self, Per1Error> {
        Lambda::new(Rational::from(v))
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    /// Numerator `p` of `lambda = p / q`.
    pub fn p(&self) -> &BigInt {
        self.0.numer()
    }

    /// Denominator `q > 0` of `lambda = p / q`.
    pub fn q(&self) -> &BigInt {
        self.0.denom()
    }
}

impl FromStr for Lambda {
    type Err = Per1Error;
    fn from_str(s: &str) -> Result<Self, Per1Error> {
        Lambda::new(s.parse()?)
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Serialize for Lambda {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

/// Which marked critical point, `+1` or `-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CriticalSign {
    Plus,
    Minus,
}

impl CriticalSign {
    pub const BOTH: [CriticalSign; 2] = [CriticalSign::Plus, CriticalSign::Minus];

    pub fn value(self) -> i64 {
        match self {
            CriticalSign::Plus => 1,
            CriticalSign::Minus => -1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            CriticalSign::Plus => CriticalSign::Minus,
            CriticalSign::Minus => CriticalSign::Plus,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CriticalSign::Plus => "+",
            CriticalSign::Minus => "-",
        }
    }
}

impl fmt::Display for CriticalSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for CriticalSign {
    type Err = Per1Error;
    fn from_str(s: &str) -> Result<Self, Per1Error> {
        match s.trim() {
            "+" | "plus" | "+1" | "1" => Ok(CriticalSign::Plus),
            "-" | "minus" | "-1" | "\u{2212}" => Ok(CriticalSign::Minus),
            other => Err(Per1Error::Q(QError::Parse(other.to_string()))),
        }
    }
}

impl Serialize for CriticalSign {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.symbol())
    }
}

/// First coordinate of the homogeneous lift in `(z1, z2)`.
///
/// `Standard` is `lambda t2 z1 z2`, the homogenisation of `f_t`.
/// `Literal` is `lambda t2 z1^2`, kept as an alternative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Lift {
    #[default]
    Standard,
    Literal,
}

impl fmt::Display for Lift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Lift::Standard => "std",
            Lift::Literal => "paper-literal",
        })
    }
}

impl FromStr for Lift {
    type Err = Per1Error;
    fn from_str(s: &str) -> Result<Self, Per1Error> {
        match s.trim() {
            "std" | "standard" => Ok(Lift::Standard),
            "paper-literal" => Ok(Lift::Literal),
            other => Err(Per1Error::Q(QError::Parse(other.to_string()))),
        }
    }
}
