//! Coprime, content-free pairs of binary forms and their evaluation.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{form_gcd, resultant, BinaryForm, PolyError};
use crate::numeric::log_abs_bigint;
use crate::qfield::{valuation_bigint, LogAbs, Place, Rational};

/// A point of the punctured plane, exact or complex.
#[derive(Clone, Debug, PartialEq)]
pub enum FormPoint {
    Rational(Rational, Rational),
    Complex(Complex64, Complex64),
}

impl FormPoint {
    pub fn rational(t1: Rational, t2: Rational) -> Self {
        FormPoint::Rational(t1, t2)
    }

    pub fn is_origin(&self) -> bool {
        match self {
            FormPoint::Rational(a, b) => a.is_zero() && b.is_zero(),
            FormPoint::Complex(a, b) => a.norm() == 0.0 && b.norm() == 0.0,
        }
    }
}

/// Integer point `D (t1, t2)` with `D` the least common denominator.
pub(crate) fn clear_denominators(t1: &Rational, t2: &Rational) -> (BigInt, BigInt, BigInt) {
    let d = t1.denom().lcm(t2.denom());
    let x1 = t1.numer() * (&d / t1.denom());
    let x2 = t2.numer() * (&d / t2.denom());
    (x1, x2, d)
}

/// `(A, B)` of a common degree `d`, jointly content-free and coprime.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryFormPair {
    a: BinaryForm,
    b: BinaryForm,
    degree: usize,
}

impl BinaryFormPair {
    /// Validates equal degree, joint content 1 and coprimality.
    pub fn new(a: BinaryForm, b: BinaryForm) -> Result<Self, PolyError> {
        let pair = BinaryFormPair::new_unchecked(a, b)?;
        let content = pair.a.coeffs().iter().chain(pair.b.coeffs()).fold(BigInt::zero(), |g, c| g.gcd(c));
        if !content.is_one() {
            return Err(PolyError::NotPrimitive);
        }
        if form_gcd(&pair.a, &pair.b)?.degree() != Some(0) {
            return Err(PolyError::NotCoprime);
        }
        Ok(pair)
    }

    /// Checks only the degrees; used where the invariants hold by construction.
    pub(crate) fn new_unchecked(a: BinaryForm, b: BinaryForm) -> Result<Self, PolyError> {
        let (Some(da), Some(db)) = (a.degree(), b.degree()) else {
            return Err(PolyError::ZeroForm);
        };
        if da != db {
            return Err(PolyError::DegreeMismatch);
        }
        Ok(BinaryFormPair { a, b, degree: da })
    }

    pub fn a(&self) -> &BinaryForm {
        &self.a
    }

    pub fn b(&self) -> &BinaryForm {
        &self.b
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Sylvester resultant, routed by size.
    pub fn resultant(&self) -> Result<BigInt, PolyError> {
        resultant::resultant_forms(&self.a, &self.b, self.degree)
    }

    /// `log max(|A(x)|_v, |B(x)|_v)`.
    ///
    /// Rational points are evaluated exactly after clearing denominators;
    /// complex points are renormalised to unit max-norm first.
    pub fn eval_lognorm(&self, point: &FormPoint, v: Place) -> Result<LogAbs, PolyError> {
        if point.is_origin() {
            return Err(PolyError::ZeroPoint);
        }
        let d = self.degree as i64;
        match (point, v) {
            (FormPoint::Rational(t1, t2), Place::Archimedean) => {
                let (x1, x2, den) = clear_denominators(t1, t2);
                let va = self.a.eval_integer(&x1, &x2);
                let vb = self.b.eval_integer(&x1, &x2);
                let m = log_abs_bigint(&va).max(log_abs_bigint(&vb));
                Ok(LogAbs::archimedean(m - d as f64 * log_abs_bigint(&den)))
            }
            (FormPoint::Rational(t1, t2), Place::Finite(p)) => {
                let (x1, x2, den) = clear_denominators(t1, t2);
                let va = self.a.eval_integer(&x1, &x2);
                let vb = self.b.eval_integer(&x1, &x2);
                let m = match (valuation_bigint(&va, p), valuation_bigint(&vb, p)) {
                    (Some(x), Some(y)) => x.min(y),
                    (Some(x), None) | (None, Some(x)) => x,
                    (None, None) => return Err(PolyError::ZeroPoint),
                };
                let vd = valuation_bigint(&den, p).unwrap_or(0);
                Ok(LogAbs::finite(-(m as i64) + d * vd as i64, p))
            }
            (FormPoint::Complex(t1, t2), Place::Archimedean) => {
                let (wa, sa) = self.a.eval_complex(*t1, *t2);
                let (wb, sb) = self.b.eval_complex(*t1, *t2);
                let la = wa.norm().ln() + sa;
                let lb = wb.norm().ln() + sb;
                Ok(LogAbs::archimedean(la.max(lb)))
            }
            (FormPoint::Complex(..), Place::Finite(_)) => Err(PolyError::ComplexAtFinitePlace),
        }
    }

    /// Canonical text: header line, then `A` and `B` coefficients `k = 0..d`.
    pub fn to_bfp(&self) -> String {
        let line = |f: &BinaryForm| {
            f.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
        };
        format!("BFP v1 deg={}\n{}\n{}\n", self.degree, line(&self.a), line(&self.b))
    }

    /// Parses `to_bfp` output and re-validates the pair invariants.
    pub fn from_bfp(text: &str) -> Result<Self, PolyError> {
        let bad = |m: &str| PolyError::Parse(m.to_string());
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty input"))?;
        let d: usize = header
            .strip_prefix("BFP v1 deg=")
            .ok_or_else(|| bad("expected header `BFP v1 deg=<d>`"))?
            .trim()
            .parse()
            .map_err(|_| bad("bad degree"))?;
        let mut read = |name: &str| -> Result<BinaryForm, PolyError> {
            let line = lines.next().ok_or_else(|| bad(&format!("missing {name} line")))?;
            let coeffs = line
                .split_whitespace()
                .map(|w| w.parse::<BigInt>().map_err(|_| bad(&format!("bad coefficient {w:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            if coeffs.len() != d + 1 {
                return Err(bad(&format!("{name} needs {} coefficients", d + 1)));
            }
            Ok(BinaryForm::new(coeffs))
        };
        let a = read("A")?;
        let b = read("B")?;
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(bad("trailing data"));
        }
        BinaryFormPair::new(a, b)
    }
}

impl fmt::Display for BinaryFormPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}
