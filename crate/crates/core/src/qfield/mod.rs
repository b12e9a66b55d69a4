//! Exact arithmetic over `Q` and its places: valuations, absolute values,
//! the product formula and the logarithmic Weil height.

mod factor;
mod place;
mod rational;

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

pub use factor::{factorize, is_probable_prime, rough_part};
pub use place::{is_prime_u64, Place, Prime};
pub use rational::Rational;

use crate::numeric::log_abs_bigint;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QError {
    #[error("valuation of zero undefined")]
    ZeroValuation,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("cannot parse {0:?}")]
    Parse(String),
    #[error("factorisation of {0} did not finish")]
    FactorizationFailed(String),
    #[error("prime factor {0} exceeds 64 bits and cannot be a certified place")]
    PrimeTooLarge(String),
}

/// `log |x|_v` on the natural-log scale.
///
/// At a finite place the value is `log_p_multiple * ln p` exactly; the
/// integer multiple is kept so callers can do exact bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogAbs {
    pub value: f64,
    #[serde(skip)]
    pub log_p_multiple: Option<i64>,
}

impl LogAbs {
    pub fn archimedean(value: f64) -> Self {
        LogAbs { value, log_p_multiple: None }
    }

    /// `k * ln p`.
    pub fn finite(k: i64, p: Prime) -> Self {
        LogAbs { value: k as f64 * p.ln(), log_p_multiple: Some(k) }
    }
}

/// `v_p(n)` for a nonzero integer; `None` for zero.
pub fn valuation_bigint(n: &BigInt, p: Prime) -> Option<u64> {
    valuation_biguint(n.magnitude(), p)
}

/// `v_p(n)` for a nonzero natural number; `None` for zero.
pub fn valuation_biguint(n: &BigUint, p: Prime) -> Option<u64> {
    if n.is_zero() {
        return None;
    }
    let pb = BigUint::from(p.get());
    let mut m = n.clone();
    let mut e = 0;
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return Some(e);
        }
        m = q;
        e += 1;
    }
}

/// `v_p(x) = v_p(num) - v_p(den)`.
pub fn padic_val(x: &Rational, p: Prime) -> Result<i64, QError> {
    let n = valuation_bigint(x.numer(), p).ok_or(QError::ZeroValuation)?;
    let d = valuation_bigint(x.denom(), p).expect("denominator is positive");
    Ok(n as i64 - d as i64)
}

/// `log |x|_v`; the finite-place value is `-v_p(x) log p`.
pub fn log_abs(x: &Rational, v: Place) -> Result<LogAbs, QError> {
    if x.is_zero() {
        return Err(QError::ZeroValuation);
    }
    match v {
        Place::Archimedean => Ok(LogAbs::archimedean(
            log_abs_bigint(x.numer()) - log_abs_bigint(x.denom()),
        )),
        Place::Finite(p) => Ok(LogAbs::finite(-padic_val(x, p)?, p)),
    }
}

/// `v_p(x)` for every prime dividing the numerator or denominator.
pub fn prime_exponents(x: &Rational) -> Result<BTreeMap<BigUint, i64>, QError> {
    if x.is_zero() {
        return Err(QError::ZeroValuation);
    }
    let mut out: BTreeMap<BigUint, i64> = BTreeMap::new();
    for (p, e) in factorize(x.numer().magnitude())? {
        out.insert(p, e as i64);
    }
    for (p, e) in factorize(x.denom().magnitude())? {
        *out.entry(p).or_insert(0) -= e as i64;
    }
    Ok(out)
}

/// The archimedean place followed by every finite place with `|x|_p != 1`.
pub fn support_places(x: &Rational) -> Result<Vec<Place>, QError> {
    let mut out = vec![Place::Archimedean];
    for p in prime_exponents(x)?.keys() {
        let small = p.to_u64().ok_or_else(|| QError::PrimeTooLarge(p.to_string()))?;
        out.push(Place::Finite(Prime::new(small)?));
    }
    Ok(out)
}

/// Formal bookkeeping of `sum_v log |x|_v` as integer combinations of `log p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductFormulaReport {
    /// `v_p(x)` over the support primes.
    pub exponents: BTreeMap<BigUint, i64>,
    /// `log |x|_inf = sum_p archimedean[p] log p`, certified by exact reconstruction.
    pub archimedean: BTreeMap<BigUint, i64>,
    /// `sum_p log |x|_p = sum_p finite[p] log p`.
    pub finite: BTreeMap<BigUint, i64>,
    /// Nonzero coefficients of the sum; empty when the formula holds.
    pub residual: BTreeMap<BigUint, i64>,
}

impl ProductFormulaReport {
    pub fn is_zero(&self) -> bool {
        self.residual.is_empty()
    }

    /// `sum_v log |x|_v` evaluated in floating point, for diagnostics.
    pub fn numeric_residual(&self) -> f64 {
        let term = |m: &BTreeMap<BigUint, i64>| -> f64 {
            m.iter()
                .map(|(p, &c)| c as f64 * crate::numeric::log_biguint(p))
                .sum()
        };
        term(&self.archimedean) + term(&self.finite)
    }
}

/// Checks `sum_v log |x|_v = 0` by exact integer bookkeeping.
///
/// The archimedean term is written as `sum_p v_p(x) log p` only after
/// verifying `|x| = prod_p p^{v_p(x)}` exactly.
pub fn product_formula_residual(x: &Rational) -> Result<ProductFormulaReport, QError> {
    let exponents = prime_exponents(x)?;
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for (p, &e) in &exponents {
        if e > 0 {
            num *= p.pow(e as u32);
        } else {
            den *= p.pow((-e) as u32);
        }
    }
    if &num != x.numer().magnitude() || &den != x.denom().magnitude() {
        return Err(QError::FactorizationFailed(x.to_string()));
    }
    let archimedean = exponents.clone();
    let finite: BTreeMap<BigUint, i64> = exponents.iter().map(|(p, &e)| (p.clone(), -e)).collect();
    let mut residual = BTreeMap::new();
    for (p, &a) in &archimedean {
        let c = a + finite.get(p).copied().unwrap_or(0);
        if c != 0 {
            residual.insert(p.clone(), c);
        }
    }
    Ok(ProductFormulaReport { exponents, archimedean, finite, residual })
}

/// `h(a/b) = log max(|a|, |b|)`; `h(0) = 0`.
pub fn weil_height(x: &Rational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let a = x.numer().magnitude();
    let b = x.denom().magnitude();
    crate::numeric::log_biguint(if a > b { a } else { b })
}

/// `h([a : b]) = log max(|a|, |b|)` for a coprime integer pair.
pub fn weil_height_pair(a: &BigInt, b: &BigInt) -> f64 {
    let m = if a.magnitude() > b.magnitude() { a } else { b };
    log_abs_bigint(m)
}
