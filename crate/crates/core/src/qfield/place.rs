//! Places of the rationals and deterministic primality testing.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::QError;

/// A certified prime below `2^64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u64);

impl Prime {
    /// Certifies `p` with a deterministic Miller–Rabin test.
    pub fn new(p: u64) -> Result<Self, QError> {
        if is_prime_u64(p) {
            Ok(Prime(p))
        } else {
            Err(QError::NotPrime(p))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    /// `ln p`.
    pub fn ln(self) -> f64 {
        (self.0 as f64).ln()
    }

    /// All primes `p <= bound`, ascending.
    pub fn up_to(bound: u64) -> Vec<Prime> {
        (2..=bound).filter(|&p| is_prime_u64(p)).map(Prime).collect()
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A place of `Q`: the usual absolute value or a `p`-adic one.
///
/// The archimedean place sorts first, then primes in increasing order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Archimedean,
    Finite(Prime),
}

impl Place {
    pub fn finite(p: u64) -> Result<Self, QError> {
        Ok(Place::Finite(Prime::new(p)?))
    }

    /// The local degree `N_v`; always 1 over `Q`.
    pub fn multiplicity(&self) -> u32 {
        1
    }

    pub fn is_archimedean(&self) -> bool {
        matches!(self, Place::Archimedean)
    }

    pub fn prime(&self) -> Option<Prime> {
        match self {
            Place::Archimedean => None,
            Place::Finite(p) => Some(*p),
        }
    }

    /// `{inf} ∪ {p <= bound}` in canonical order.
    pub fn up_to(bound: u64) -> Vec<Place> {
        std::iter::once(Place::Archimedean)
            .chain(Prime::up_to(bound).into_iter().map(Place::Finite))
            .collect()
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Archimedean => write!(f, "inf"),
            Place::Finite(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for Place {
    type Err = QError;

    fn from_str(s: &str) -> Result<Self, QError> {
        match s.trim() {
            "inf" | "\u{221e}" => Ok(Place::Archimedean),
            t => {
                let p: u64 = t.parse().map_err(|_| QError::Parse(s.to_string()))?;
                Place::finite(p)
            }
        }
    }
}

impl Serialize for Place {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Place {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin; the first twelve prime bases suffice below `2^64`.
pub fn is_prime_u64(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
