//! Overflow-safe conversions between big integers and `f64`.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{ToPrimitive, Zero};

const LN2: f64 = std::f64::consts::LN_2;

/// Natural logarithm of `|x|`; `-inf` for zero. Accurate for any size.
pub fn log_abs_bigint(x: &BigInt) -> f64 {
    log_biguint(x.magnitude())
}

/// Natural logarithm of a nonnegative big integer; `-inf` for zero.
pub fn log_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * LN2
}

/// `x / 2^shift` as an `f64`, without intermediate overflow.
pub fn scaled_f64(x: &BigInt, shift: u64) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let mag = x.magnitude();
    let bits = mag.bits();
    let s = bits.saturating_sub(64);
    let top = (mag >> s).to_f64().unwrap_or(f64::INFINITY);
    let e = s as i64 - shift as i64;
    let v = top * pow2(e);
    if x.sign() == Sign::Minus {
        -v
    } else {
        v
    }
}

/// `2^e` as `f64`, saturating to `0` or `inf` outside the exponent range.
pub fn pow2(e: i64) -> f64 {
    if e > 1100 {
        f64::INFINITY
    } else if e < -1100 {
        0.0
    } else {
        2f64.powi(e as i32)
    }
}

/// Largest bit length among the integers, `0` when all are zero.
pub fn max_bits<'a>(xs: impl IntoIterator<Item = &'a BigInt>) -> u64 {
    xs.into_iter().map(|x| x.bits()).max().unwrap_or(0)
}
