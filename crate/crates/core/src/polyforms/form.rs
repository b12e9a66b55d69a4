//! Homogeneous binary forms with integer coefficients.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{PolyError, UniPoly};
use crate::numeric::{max_bits, scaled_f64};
use crate::qfield::Rational;

/// A form `sum_k c_k t1^k t2^(d-k)`.
///
/// A nonzero form of degree `d` stores exactly `d + 1` coefficients; the
/// zero form stores none and has no degree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryForm {
    coeffs: Vec<BigInt>,
}

impl BinaryForm {
    /// Builds a form from `c_0..c_d`; all-zero input gives the zero form.
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        if coeffs.iter().all(Zero::is_zero) {
            BinaryForm { coeffs: Vec::new() }
        } else {
            BinaryForm { coeffs }
        }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        BinaryForm::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        BinaryForm { coeffs: Vec::new() }
    }

    /// The degree-0 form `c`.
    pub fn constant(c: impl Into<BigInt>) -> Self {
        BinaryForm::new(vec![c.into()])
    }

    pub fn t1() -> Self {
        BinaryForm::from_i64(&[0, 1])
    }

    pub fn t2() -> Self {
        BinaryForm::from_i64(&[1, 0])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// `c_0..c_d`; empty for the zero form.
    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn scale(&self, c: &BigInt) -> BinaryForm {
        BinaryForm::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    /// Sum of two forms of equal degree (the zero form adds to anything).
    pub fn add(&self, other: &BinaryForm) -> Result<BinaryForm, PolyError> {
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.degree() != other.degree() {
            return Err(PolyError::DegreeMismatch);
        }
        Ok(BinaryForm::new(
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn mul(&self, other: &BinaryForm) -> BinaryForm {
        if self.is_zero() || other.is_zero() {
            return BinaryForm::zero();
        }
        let mut v = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        BinaryForm::new(v)
    }

    /// Positive gcd of the coefficients and the quotient.
    pub fn content_and_primitive(&self) -> Result<(BigInt, BinaryForm), PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroForm);
        }
        let c = self.coeffs.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
        Ok((c.clone(), BinaryForm { coeffs: self.coeffs.iter().map(|x| x / &c).collect() }))
    }

    /// Largest `m` with `t2^m` dividing the form.
    pub fn t2_order(&self) -> usize {
        self.coeffs.iter().rev().take_while(|c| c.is_zero()).count()
    }

    /// `f(t, 1)`.
    pub fn dehomogenize(&self) -> UniPoly {
        UniPoly::new(self.coeffs.clone())
    }

    /// The degree-`d` form with `f(t, 1) = u`; requires `deg u <= d`.
    pub fn homogenize(u: &UniPoly, d: usize) -> Result<BinaryForm, PolyError> {
        let k = u.coeffs().len();
        if k > d + 1 {
            return Err(PolyError::DegreeMismatch);
        }
        if u.is_zero() {
            return Ok(BinaryForm::zero());
        }
        let mut v = u.coeffs().to_vec();
        v.resize(d + 1, BigInt::zero());
        Ok(BinaryForm { coeffs: v })
    }

    /// `self / g` when the division is exact over `Z`.
    pub fn div_exact(&self, g: &BinaryForm) -> Option<BinaryForm> {
        let dg = g.degree()?;
        if self.is_zero() {
            return Some(BinaryForm::zero());
        }
        let df = self.degree()?;
        if dg > df {
            return None;
        }
        let q = self.dehomogenize().div_exact(&g.dehomogenize())?;
        let q = BinaryForm::homogenize(&q, df - dg).ok()?;
        (q.mul(g) == *self).then_some(q)
    }

    /// Exact homogeneous Horner evaluation.
    pub fn eval_exact(&self, t1: &Rational, t2: &Rational) -> Rational {
        let Some(d) = self.degree() else { return Rational::zero() };
        let mut pow2 = Vec::with_capacity(d + 1);
        pow2.push(Rational::one());
        for k in 1..=d {
            pow2.push(&pow2[k - 1] * t2);
        }
        let mut r = Rational::from_integer(self.coeffs[d].clone());
        for k in (0..d).rev() {
            r = r * t1 + Rational::from_integer(self.coeffs[k].clone()) * &pow2[d - k];
        }
        r
    }

    /// Exact evaluation at an integer point.
    pub fn eval_integer(&self, x1: &BigInt, x2: &BigInt) -> BigInt {
        let Some(d) = self.degree() else { return BigInt::zero() };
        let mut pow2 = Vec::with_capacity(d + 1);
        pow2.push(BigInt::one());
        for k in 1..=d {
            pow2.push(&pow2[k - 1] * x2);
        }
        let mut r = self.coeffs[d].clone();
        for k in (0..d).rev() {
            r = r * x1 + &self.coeffs[k] * &pow2[d - k];
        }
        r
    }

    /// `f(t1, t2) = w * exp(s)` returned as `(w, s)`, overflow-free.
    ///
    /// Horner runs in the ratio of the smaller to the larger coordinate, with
    /// coefficients scaled into `f64` range.
    pub fn eval_complex(&self, t1: Complex64, t2: Complex64) -> (Complex64, f64) {
        let Some(d) = self.degree() else { return (Complex64::new(0.0, 0.0), 0.0) };
        let shift = max_bits(&self.coeffs).saturating_sub(60);
        let c: Vec<f64> = self.coeffs.iter().map(|x| scaled_f64(x, shift)).collect();
        let shift_log = shift as f64 * std::f64::consts::LN_2;
        let (big, w) = if t1.norm() >= t2.norm() {
            // f = t1^d sum_k c_k (t2/t1)^(d-k)
            let u = t2 / t1;
            let mut r = Complex64::new(c[0], 0.0);
            for k in 1..=d {
                r = r * u + c[k];
            }
            (t1, r)
        } else {
            let u = t1 / t2;
            let mut r = Complex64::new(c[d], 0.0);
            for k in (0..d).rev() {
                r = r * u + c[k];
            }
            (t2, r)
        };
        let m = big.norm();
        if m == 0.0 {
            return (Complex64::new(0.0, 0.0), 0.0);
        }
        let phase = (big / m).powu(d as u32);
        (w * phase, shift_log + d as f64 * m.ln())
    }
}

/// Primitive form of maximal degree dividing `f` and `g`, with positive
/// leading coefficient in `t1`.
///
/// Powers of `t2` are split off, the rest is the univariate gcd of the
/// dehomogenisations, re-homogenised.
pub fn form_gcd(f: &BinaryForm, g: &BinaryForm) -> Result<BinaryForm, PolyError> {
    if f.is_zero() || g.is_zero() {
        return Err(PolyError::ZeroForm);
    }
    let m = f.t2_order().min(g.t2_order());
    let h = f.dehomogenize().gcd(&g.dehomogenize());
    let dh = h.degree().unwrap_or(0);
    let h = BinaryForm::homogenize(&h, dh + m)?;
    Ok(h)
}

impl fmt::Display for BinaryForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(d) = self.degree() else { return write!(f, "0") };
        let mut first = true;
        for k in (0..=d).rev() {
            let c = &self.coeffs[k];
            if c.is_zero() {
                continue;
            }
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c.is_negative() { "-" } else { "+" })?;
            }
            first = false;
            let a = c.abs();
            let mut parts = Vec::new();
            if !a.is_one() || d == 0 {
                parts.push(a.to_string());
            }
            for (var, e) in [("t1", k), ("t2", d - k)] {
                match e {
                    0 => {}
                    1 => parts.push(var.to_string()),
                    _ => parts.push(format!("{var}^{e}")),
                }
            }
            if parts.is_empty() {
                parts.push("1".into());
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bf(c: &[i64]) -> BinaryForm {
        BinaryForm::from_i64(c)
    }

    #[test]
    fn content_examples() {
        // 4 t1 t2 + 8 t2^2
        let (c, p) = bf(&[8, 4, 0]).content_and_primitive().unwrap();
        assert_eq!((c, p), (BigInt::from(4), bf(&[2, 1, 0])));
        let (c, p) = bf(&[2, 1]).content_and_primitive().unwrap();
        assert_eq!((c, p), (BigInt::from(1), bf(&[2, 1])));
        let (c, p) = bf(&[0, 0, 6]).content_and_primitive().unwrap();
        assert_eq!((c, p), (BigInt::from(6), bf(&[0, 0, 1])));
        assert_eq!(BinaryForm::zero().content_and_primitive(), Err(PolyError::ZeroForm));
    }

    #[test]
    fn gcd_examples() {
        // 4 t2^2 (t1 + 2 t2) = 4 t1 t2^2 + 8 t2^3 and 3 t1^2 t2 + 8 t1 t2^2 + 8 t2^3
        let f = bf(&[8, 4, 0, 0]);
        let g = bf(&[8, 8, 3, 0]);
        assert_eq!(form_gcd(&f, &g).unwrap(), BinaryForm::t2());
        assert_eq!(form_gcd(&BinaryForm::t1(), &BinaryForm::t2()).unwrap(), BinaryForm::constant(1));
        // t1^2 - t2^2 and t1 - t2
        assert_eq!(form_gcd(&bf(&[-1, 0, 1]), &bf(&[-1, 1])).unwrap(), bf(&[-1, 1]));
        assert!(form_gcd(&BinaryForm::zero(), &bf(&[1])).is_err());
    }

    #[test]
    fn eval_examples() {
        let q = |s: &str| s.parse::<Rational>().unwrap();
        assert_eq!(bf(&[2, 1]).eval_exact(&q("0"), &q("1")), q("2"));
        assert_eq!(bf(&[8, 4, 0]).eval_exact(&q("0"), &q("1")), q("8"));
        assert_eq!(bf(&[2, 1]).eval_exact(&q("-4/3"), &q("1")), q("2/3"));
    }

    #[test]
    fn complex_eval_matches_exact() {
        let f = bf(&[8, 8, 3]);
        for (a, b) in [(0.5, 1.0), (1.0, -0.25), (3.0, 2.0)] {
            let (w, s) = f.eval_complex(Complex64::new(a, 0.0), Complex64::new(b, 0.0));
            let exact = 3.0 * a * a + 8.0 * a * b + 8.0 * b * b;
            assert!(((w * s.exp()).re - exact).abs() < 1e-12 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn display() {
        assert_eq!(bf(&[8, 4, 0]).to_string(), "4*t1*t2 + 8*t2^2");
        assert_eq!(bf(&[8, 8, 3]).to_string(), "3*t1^2 + 8*t1*t2 + 8*t2^2");
        assert_eq!(BinaryForm::constant(-1).to_string(), "-1");
    }
}
