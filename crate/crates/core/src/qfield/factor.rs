//! Integer factorisation by trial division and Pollard–Brent rho.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::place::{is_prime_u64, mul_mod};
use super::QError;

const TRIAL_BOUND: u64 = 10_000;
/// Iteration budget for one rho attempt on a multi-word composite.
const RHO_BIG_BUDGET: u64 = 2_000_000;

fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| (2..TRIAL_BOUND).filter(|&p| is_prime_u64(p)).collect())
}

/// Prime factorisation of `n >= 1` as a map `prime -> exponent`.
///
/// Fails only if a composite cofactor above `2^64` resists Pollard rho.
pub fn factorize(n: &BigUint) -> Result<BTreeMap<BigUint, u32>, QError> {
    let mut out = BTreeMap::new();
    if n.is_zero() {
        return Err(QError::ZeroValuation);
    }
    let mut m = n.clone();
    for &p in small_primes() {
        let pb = BigUint::from(p);
        if &pb * &pb > m {
            break;
        }
        let mut e = 0;
        loop {
            let (q, r) = m.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            m = q;
            e += 1;
        }
        if e > 0 {
            out.insert(pb, e);
        }
    }
    let mut stack = vec![m];
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if is_probable_prime(&m) {
            *out.entry(m).or_insert(0) += 1;
            continue;
        }
        let d = find_factor(&m).ok_or_else(|| QError::FactorizationFailed(m.to_string()))?;
        let q = &m / &d;
        stack.push(d);
        stack.push(q);
    }
    Ok(out)
}

/// Removes every prime factor `p <= bound` from `n`.
pub fn rough_part(n: &BigUint, bound: u64) -> BigUint {
    let mut m = n.clone();
    if m.is_zero() {
        return m;
    }
    for p in 2..=bound {
        if !is_prime_u64(p) {
            continue;
        }
        let pb = BigUint::from(p);
        loop {
            let (q, r) = m.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            m = q;
        }
    }
    m
}

/// Miller–Rabin; deterministic below `2^64`, twenty prime bases above.
pub fn is_probable_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    if n.is_even() {
        return false;
    }
    let one = BigUint::one();
    let nm1 = n - &one;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    'witness: for &a in small_primes().iter().take(20) {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == nm1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn find_factor(n: &BigUint) -> Option<BigUint> {
    if let Some(small) = n.to_u64() {
        return rho_u64(small).map(BigUint::from);
    }
    (1u64..8).find_map(|c| rho_big(n, c))
}

fn rho_u64(n: u64) -> Option<u64> {
    if n % 2 == 0 {
        return Some(2);
    }
    for c in 1..64u64 {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = x.abs_diff(y).gcd(&n);
        }
        if d != n {
            return Some(d);
        }
    }
    None
}

fn rho_big(n: &BigUint, c: u64) -> Option<BigUint> {
    let c = BigUint::from(c);
    let f = |x: &BigUint| (x * x + &c) % n;
    let mut x = BigUint::from(2u32);
    let mut y = x.clone();
    for _ in 0..RHO_BIG_BUDGET {
        x = f(&x);
        y = f(&f(&y));
        let diff = if x > y { &x - &y } else { &y - &x };
        let d = diff.gcd(n);
        if d.is_one() {
            continue;
        }
        return if &d == n { None } else { Some(d) };
    }
    None
}
