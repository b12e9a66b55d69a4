//! Dense univariate polynomials over `Z` with subresultant gcd and resultant.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::qfield::Rational;

/// Coefficients in increasing degree, with no trailing zeros; the zero
/// polynomial has no coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct UniPoly {
    coeffs: Vec<BigInt>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        UniPoly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: BigInt) -> Self {
        UniPoly::new(vec![c])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Leading coefficient; zero for the zero polynomial.
    pub fn lc(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    /// Nonnegative gcd of the coefficients.
    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// `self / content` with positive leading coefficient.
    pub fn primitive_part(&self) -> UniPoly {
        if self.is_zero() {
            return UniPoly::zero();
        }
        let mut c = self.content();
        if self.lc().is_negative() {
            c = -c;
        }
        self.div_scalar_exact(&c)
    }

    pub fn scale(&self, c: &BigInt) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    /// Divides every coefficient by `c`, which must divide each exactly.
    pub(crate) fn div_scalar_exact(&self, c: &BigInt) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|x| x / c).collect())
    }

    fn shifted(&self, k: usize) -> UniPoly {
        if self.is_zero() {
            return UniPoly::zero();
        }
        let mut v = vec![BigInt::zero(); k];
        v.extend(self.coeffs.iter().cloned());
        UniPoly { coeffs: v }
    }

    pub fn derivative(&self) -> UniPoly {
        UniPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigInt::from(k))
                .collect(),
        )
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_rational(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + Rational::from_integer(c.clone()))
    }

    /// `log max |c_k|`; `-inf` for the zero polynomial.
    pub fn log_max_coeff(&self) -> f64 {
        self.coeffs
            .iter()
            .map(crate::numeric::log_abs_bigint)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Pseudo-remainder: `lc(d)^(deg self - deg d + 1) self mod d`.
    pub fn pseudo_rem(&self, d: &UniPoly) -> UniPoly {
        let dd = d.degree().expect("pseudo-division by zero");
        let Some(ds) = self.degree() else { return UniPoly::zero() };
        if ds < dd {
            return self.clone();
        }
        let l = d.lc();
        let mut r = self.clone();
        let mut steps = 0u32;
        while let Some(dr) = r.degree() {
            if dr < dd {
                break;
            }
            let lr = r.lc();
            r = &r.scale(&l) - &d.scale(&lr).shifted(dr - dd);
            steps += 1;
        }
        let missing = (ds - dd + 1) as u32 - steps;
        if missing > 0 {
            r = r.scale(&num_traits::pow(l, missing as usize));
        }
        r
    }

    /// Quotient when `d` divides `self` exactly over `Z`.
    pub fn div_exact(&self, d: &UniPoly) -> Option<UniPoly> {
        let dd = d.degree()?;
        if self.is_zero() {
            return Some(UniPoly::zero());
        }
        let ds = self.degree()?;
        if ds < dd {
            return None;
        }
        let l = d.lc();
        let mut r = self.clone();
        let mut q = vec![BigInt::zero(); ds - dd + 1];
        while let Some(dr) = r.degree() {
            if dr < dd {
                return None;
            }
            let (c, rem) = r.lc().div_rem(&l);
            if !rem.is_zero() {
                return None;
            }
            q[dr - dd] = c.clone();
            r = &r - &d.scale(&c).shifted(dr - dd);
        }
        Some(UniPoly::new(q))
    }

    /// Primitive gcd with positive leading coefficient; `gcd(0, 0) = 0`.
    ///
    /// A modular test settles the common coprime case; otherwise the
    /// subresultant remainder sequence is used.
    pub fn gcd(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() {
            return other.primitive_part();
        }
        if other.is_zero() {
            return self.primitive_part();
        }
        if coprime_mod_p(self, other) {
            return UniPoly::constant(BigInt::one());
        }
        self.gcd_subresultant(other)
    }

    /// Subresultant remainder sequence gcd, without the modular shortcut.
    pub fn gcd_subresultant(&self, other: &UniPoly) -> UniPoly {
        let (mut a, mut b) = if self.degree() >= other.degree() {
            (self.primitive_part(), other.primitive_part())
        } else {
            (other.primitive_part(), self.primitive_part())
        };
        if b.is_zero() {
            return a;
        }
        let mut g = BigInt::one();
        let mut h = BigInt::one();
        loop {
            let delta = a.degree().unwrap() - b.degree().unwrap();
            let r = a.pseudo_rem(&b);
            if r.is_zero() {
                break;
            }
            if r.degree() == Some(0) {
                return UniPoly::constant(BigInt::one());
            }
            a = b;
            let div = &g * num_traits::pow(h.clone(), delta);
            b = r.div_scalar_exact(&div);
            g = a.lc();
            h = if delta == 0 {
                h
            } else {
                num_traits::pow(g.clone(), delta) / num_traits::pow(h, delta - 1)
            };
        }
        b.primitive_part()
    }

    /// `Res(self, other)` for the actual degrees, by the subresultant algorithm.
    ///
    /// Matches the Sylvester determinant with `self`'s rows first.
    pub fn resultant(&self, other: &UniPoly) -> BigInt {
        let (Some(da), Some(db)) = (self.degree(), other.degree()) else {
            return BigInt::zero();
        };
        if da == 0 {
            return num_traits::pow(self.lc(), db);
        }
        if db == 0 {
            return num_traits::pow(other.lc(), da);
        }
        let ca = self.content();
        let cb = other.content();
        let t = num_traits::pow(ca.clone(), db) * num_traits::pow(cb.clone(), da);
        let mut a = self.div_scalar_exact(&ca);
        let mut b = other.div_scalar_exact(&cb);
        let mut s = BigInt::one();
        if da < db {
            std::mem::swap(&mut a, &mut b);
            if da % 2 == 1 && db % 2 == 1 {
                s = -s;
            }
        }
        let mut g = BigInt::one();
        let mut h = BigInt::one();
        loop {
            let (na, nb) = (a.degree().unwrap(), b.degree().unwrap());
            let delta = na - nb;
            if na % 2 == 1 && nb % 2 == 1 {
                s = -s;
            }
            let r = a.pseudo_rem(&b);
            if r.is_zero() {
                return BigInt::zero();
            }
            a = b;
            let div = &g * num_traits::pow(h.clone(), delta);
            b = r.div_scalar_exact(&div);
            g = a.lc();
            h = if delta == 0 {
                h
            } else {
                num_traits::pow(g.clone(), delta) / num_traits::pow(h, delta - 1)
            };
            if b.degree() == Some(0) {
                break;
            }
        }
        let na = a.degree().unwrap();
        let last = num_traits::pow(b.lc(), na) / num_traits::pow(h, na - 1);
        s * t * last
    }
}

const MOD_PRIMES: [u64; 3] = [2_305_843_009_213_693_951, 4_611_686_018_427_387_847, 9_223_372_036_854_775_783];

/// True when some prime not dividing either leading coefficient gives a
/// constant gcd modulo `p`; then the integer gcd is constant as well.
fn coprime_mod_p(f: &UniPoly, g: &UniPoly) -> bool {
    if f.degree() == Some(0) || g.degree() == Some(0) {
        return true;
    }
    MOD_PRIMES.iter().any(|&p| {
        let pb = BigInt::from(p);
        if (f.lc() % &pb).is_zero() || (g.lc() % &pb).is_zero() {
            return false;
        }
        let fp = reduce_mod(f, p);
        let gp = reduce_mod(g, p);
        gcd_degree_mod(fp, gp, p) == 0
    })
}

fn reduce_mod(f: &UniPoly, p: u64) -> Vec<u64> {
    let pb = BigInt::from(p);
    f.coeffs
        .iter()
        .map(|c| c.mod_floor(&pb).to_u64().expect("residue fits"))
        .collect()
}

fn mulm(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let (mut r, mut e, mut b) = (1u64, p - 2, a % p);
    while e > 0 {
        if e & 1 == 1 {
            r = mulm(r, b, p);
        }
        b = mulm(b, b, p);
        e >>= 1;
    }
    r
}

fn trim_mod(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn gcd_degree_mod(mut a: Vec<u64>, mut b: Vec<u64>, p: u64) -> usize {
    trim_mod(&mut a);
    trim_mod(&mut b);
    while !b.is_empty() {
        // a <- a mod b
        let inv = inv_mod(*b.last().unwrap(), p);
        while a.len() >= b.len() {
            let c = mulm(*a.last().unwrap(), inv, p);
            let off = a.len() - b.len();
            for (i, &bi) in b.iter().enumerate() {
                let s = mulm(c, bi, p);
                a[off + i] = (a[off + i] + p - s) % p;
            }
            trim_mod(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

impl Add for &UniPoly {
    type Output = UniPoly;
    fn add(self, rhs: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let z = BigInt::zero();
        UniPoly::new(
            (0..n)
                .map(|k| self.coeffs.get(k).unwrap_or(&z) + rhs.coeffs.get(k).unwrap_or(&z))
                .collect(),
        )
    }
}

impl Sub for &UniPoly {
    type Output = UniPoly;
    fn sub(self, rhs: &UniPoly) -> UniPoly {
        self + &(-rhs)
    }
}

impl Neg for &UniPoly {
    type Output = UniPoly;
    fn neg(self) -> UniPoly {
        UniPoly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Mul for &UniPoly {
    type Output = UniPoly;
    fn mul(self, rhs: &UniPoly) -> UniPoly {
        if self.is_zero() || rhs.is_zero() {
            return UniPoly::zero();
        }
        let mut v = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        UniPoly::new(v)
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match k {
                0 => write!(f, "{a}")?,
                _ => {
                    if !a.is_one() {
                        write!(f, "{a}*")?;
                    }
                    if k == 1 {
                        write!(f, "t")?;
                    } else {
                        write!(f, "t^{k}")?;
                    }
                }
            }
        }
        Ok(())
    }
}
