//! `gamma_v(lambda) = 1/2 sum_{i >= 1} 2^-i log |1 + lambda + ... + lambda^i|_v`.

use super::{PotentialError, PotentialValue, Provenance};
use crate::numeric::log_abs_bigint;
use crate::per1::Lambda;
use crate::qfield::{padic_val, Place, Rational};

/// Hard cap on the number of summed terms.
const MAX_TERMS: usize = 4000;

/// Tail bound after `n` terms for the envelope
/// `|term_i| <= a + b (i + 1)`: `1/2 2^-n (a + b (n + 3))`.
fn tail(n: usize, a: f64, b: f64) -> f64 {
    0.5 * 2f64.powi(-(n as i32)) * (a + b * (n as f64 + 3.0))
}

/// `gamma_v(lambda)` with a certified truncation bound.
///
/// * At `inf`: `|log |S_i|| <= |log |lambda - 1|| + ln 2 + (i + 1)(log+ |lambda| + log q)`
///   since `lambda^(i+1) - 1` is a nonzero integer over `q^(i+1)`.
/// * At `p` with `v_p(lambda) > 0` every `S_i` is a `p`-unit: exactly `0`.
/// * At `p` with `v_p(lambda) = -k < 0`: `v_p(S_i) = -i k`, so the sum is
///   exactly `k ln p = log |lambda|_p`.
/// * At `p` with `lambda` a unit: terms are `<= 0` and
///   `v_p(S_i) ln p <= (i + 1) h(lambda) + ln 2`. Summation continues to
///   the first nonzero term (at most `p - 1` terms).
pub fn gamma_series(lambda: &Lambda, v: Place, tol: f64) -> Result<PotentialValue, PotentialError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(PotentialError::InvalidTolerance);
    }
    let lam = lambda.value();
    let one = Rational::one();
    match v {
        Place::Archimedean => {
            let a = (lam - &one).abs().to_f64().ln().abs();
            let logq = log_abs_bigint(lambda.q());
            let b = lam.abs().to_f64().ln().max(0.0) + logq;
            let a = a + std::f64::consts::LN_2;
            let mut sum = 0.0;
            let mut mag = 0.0;
            let mut s = one.clone();
            let mut pow = one.clone();
            let mut n = 0;
            while n < MAX_TERMS && (n == 0 || tail(n, a, b) > tol) {
                n += 1;
                pow = &pow * lam;
                s = &s + &pow;
                let term = 0.5 * 2f64.powi(-(n as i32)) * log_abs_rational(&s);
                sum += term;
                mag += term.abs();
            }
            let err = tail(n, a, b) + 1e-15 * (n as f64 + 1.0) * (1.0 + mag);
            Ok(PotentialValue::new(sum, err, Provenance::SeriesTail))
        }
        Place::Finite(p) => {
            let k = padic_val(lam, p)?;
            if k > 0 {
                return Ok(PotentialValue::log_p(Rational::zero(), p, 0.0, Provenance::Exact));
            }
            if k < 0 {
                return Ok(PotentialValue::log_p(Rational::from(-k), p, 0.0, Provenance::Exact));
            }
            let h = log_abs_bigint(lambda.p()).max(log_abs_bigint(lambda.q()));
            let (a, b) = (std::f64::consts::LN_2, h);
            let mut coeff = Rational::zero();
            let mut s = one.clone();
            let mut pow = one.clone();
            let mut weight = Rational::new(1, 2).expect("nonzero");
            let mut n = 0;
            // Terms are <= 0, so the partial sum is an upper bound; running
            // to the first nonzero term makes its sign exact.
            while n < MAX_TERMS && (n == 0 || tail(n, a, b) > tol || coeff.is_zero()) {
                n += 1;
                pow = &pow * lam;
                s = &s + &pow;
                weight = &weight * &Rational::new(1, 2).expect("nonzero");
                let vs = padic_val(&s, p)?;
                if vs != 0 {
                    coeff = &coeff - &(&weight * &Rational::from(vs));
                }
            }
            Ok(PotentialValue::log_p(coeff, p, tail(n, a, b), Provenance::SeriesTail))
        }
    }
}

fn log_abs_rational(x: &Rational) -> f64 {
    log_abs_bigint(x.numer()) - log_abs_bigint(x.denom())
}

/// `1 + lambda + ... + lambda^i` for `i = 1..=n`, exactly.
pub fn geometric_partial_sums(lambda: &Lambda, n: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(n);
    let mut s = Rational::one();
    let mut pow = Rational::one();
    for _ in 0..n {
        pow = &pow * lambda.value();
        s = &s + &pow;
        out.push(s.clone());
    }
    out
}
