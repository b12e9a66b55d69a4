//! Escape rates `G_v^±(t1, t2) = lim log ||F_n(t1, t2)||_v / deg F_n`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::Zero;

use super::{EscapeMode, Family, PotentialError, PotentialValue, Provenance};
use crate::numeric::log_abs_bigint;
use crate::per1::{CriticalSign, FnSequence, MapLift};
use crate::polyforms::{clear_denominators, FormPoint};
use crate::qfield::{log_abs, valuation_bigint, Place, Prime, Rational};

/// Relative rounding allowance added to every archimedean error.
pub(crate) const ROUNDING: f64 = 1e-12;

/// The normalised terms `e_k = log ||F_k(x)||_v / d_k` for `k = 1..=n`.
#[derive(Clone, Debug, PartialEq)]
pub struct EscapeLevels {
    pub place: Place,
    pub degrees: Vec<usize>,
    pub levels: Vec<f64>,
    /// Exact multiples of `ln p` at a finite place and rational point.
    pub log_p_coeffs: Option<Vec<Rational>>,
}

impl EscapeLevels {
    pub fn last(&self) -> f64 {
        *self.levels.last().expect("at least one level")
    }
}

/// Primitive integer representative `x` and scalar `alpha` with `t = alpha x`.
fn primitive_rep(t1: &Rational, t2: &Rational) -> (BigInt, BigInt, Rational) {
    let (x1, x2, den) = clear_denominators(t1, t2);
    let g = x1.gcd(&x2);
    let alpha = Rational::new(g.clone(), den).expect("nonzero denominator");
    (x1 / &g, x2 / &g, alpha)
}

fn neg_valuation(v: &BigInt, p: Prime) -> Option<i64> {
    valuation_bigint(v, p).map(|k| -(k as i64))
}

/// Data fixing the recursion `F_k(x) = Phi_x(F_{k-1}(x)) / (c g(x))` beyond
/// the computed depth at a primitive integer point `x`.
pub(crate) struct TailData {
    pub content: BigInt,
    pub gx: BigInt,
    pub map: MapLift,
    pub resultant: BigInt,
}

/// `None` unless every level `>= 2` removed the same linear gcd and
/// content, and `Phi_x` has nonzero resultant and `g(x) != 0`.
pub(crate) fn tail_data(seq: &FnSequence, x1: &BigInt, x2: &BigInt) -> Option<TailData> {
    let (g, c) = seq.uniform_tail()?;
    let n = seq.n_max();
    if g.degree() != Some(1) || n < 2 || seq.degree(n).ok()? != 2 * seq.degree(n - 1).ok()? {
        return None;
    }
    let gx = g.eval_integer(x1, x2);
    if gx.is_zero() {
        return None;
    }
    let map = seq.map_at(x1, x2);
    let resultant = map.resultant();
    if resultant.is_zero() {
        return None;
    }
    Some(TailData { content: c.clone(), gx, map, resultant })
}

/// `(c, g(x), Res(Phi_x))` of the uniform recursion tail at `x`.
pub(crate) fn tail_data_for(family: &Family, s: CriticalSign, x1: &BigInt, x2: &BigInt) -> Option<(BigInt, BigInt, BigInt)> {
    tail_data(family.sequence(s), x1, x2).map(|td| (td.content, td.gx, td.resultant))
}

/// Bounds `[lo, hi]` for `log ||F_k(x)|| - 2 log ||F_{k-1}(x)||` at every
/// level beyond the computed depth.
///
/// At a finite place the bounds are integers in units of `ln p`.
fn increment_bounds(td: &TailData, v: Place) -> Option<(f64, f64)> {
    match v {
        Place::Archimedean => {
            let k = td.map.macaulay_constant()?;
            let shift = log_abs_bigint(&td.content) + log_abs_bigint(&td.gx);
            let lo = log_abs_bigint(&td.resultant) - k.to_f64().ln() - shift;
            let hi = td.map.log_row_norm() - shift;
            Some((lo, hi))
        }
        Place::Finite(p) => {
            let vr = valuation_bigint(&td.resultant, p)? as f64;
            let shift = (valuation_bigint(&td.content, p)? + valuation_bigint(&td.gx, p)?) as f64;
            Some((shift - vr, shift))
        }
    }
}

/// A rational point `t = alpha x` with `x` primitive, and `F_k(x)` exactly.
pub(crate) struct RationalPoint {
    pub x1: BigInt,
    pub x2: BigInt,
    pub alpha: Rational,
    pub values: Vec<(BigInt, BigInt)>,
}

impl Family {
    fn require_depth(&self) -> Result<usize, PotentialError> {
        let n = self.n_max();
        if n < 2 {
            return Err(PotentialError::TooShallow(2));
        }
        Ok(n)
    }

    fn degrees(&self, s: CriticalSign) -> Vec<usize> {
        let seq = self.sequence(s);
        (1..=self.n_max()).map(|k| seq.entries()[k].degree()).collect()
    }

    pub(crate) fn rational_point(&self, s: CriticalSign, t1: &Rational, t2: &Rational) -> RationalPoint {
        let (x1, x2, alpha) = primitive_rep(t1, t2);
        let values = self.sequence(s).values_integer(&x1, &x2);
        RationalPoint { x1, x2, alpha, values }
    }

    fn rational_levels(&self, s: CriticalSign, v: Place, rp: &RationalPoint) -> Result<EscapeLevels, PotentialError> {
        let degrees = self.degrees(s);
        let plus = self.escape_mode() == EscapeMode::LogPlus;
        match v {
            Place::Archimedean => {
                let shift = log_abs(&rp.alpha, v)?.value;
                let levels = rp.values[1..]
                    .iter()
                    .zip(&degrees)
                    .map(|((a, b), &d)| {
                        let l = log_abs_bigint(a).max(log_abs_bigint(b));
                        if plus {
                            (l + d as f64 * shift).max(0.0) / d as f64
                        } else {
                            l / d as f64 + shift
                        }
                    })
                    .collect();
                Ok(EscapeLevels { place: v, degrees, levels, log_p_coeffs: None })
            }
            Place::Finite(p) => {
                let va = -log_abs(&rp.alpha, v)?.log_p_multiple.expect("finite place");
                let mut coeffs = Vec::with_capacity(degrees.len());
                for ((a, b), &d) in rp.values[1..].iter().zip(&degrees) {
                    let m = match (neg_valuation(a, p), neg_valuation(b, p)) {
                        (Some(x), Some(y)) => x.max(y),
                        (Some(x), None) | (None, Some(x)) => x,
                        (None, None) => {
                            return Err(PotentialError::Numerical(format!("F_k({}, {}) = 0", rp.x1, rp.x2)))
                        }
                    };
                    // log ||F_k(t)||_p = (m - d v_p(alpha)) ln p
                    let mut num = m - d as i64 * va;
                    if plus {
                        num = num.max(0);
                    }
                    coeffs.push(Rational::new(num, d as i64).expect("positive degree"));
                }
                let levels = coeffs.iter().map(|c| c.to_f64() * p.ln()).collect();
                Ok(EscapeLevels { place: v, degrees, levels, log_p_coeffs: Some(coeffs) })
            }
        }
    }

    /// The normalised terms `e_k` at a point of the punctured plane.
    pub fn escape_levels(&self, s: CriticalSign, v: Place, point: &FormPoint) -> Result<EscapeLevels, PotentialError> {
        if point.is_origin() {
            return Err(PotentialError::ZeroPoint);
        }
        match point {
            FormPoint::Rational(t1, t2) => self.rational_levels(s, v, &self.rational_point(s, t1, t2)),
            FormPoint::Complex(t1, t2) => {
                if !v.is_archimedean() {
                    return Err(PotentialError::Poly(crate::polyforms::PolyError::ComplexAtFinitePlace));
                }
                let seq = self.sequence(s);
                let n = self.n_max();
                let degrees = self.degrees(s);
                let plus = self.escape_mode() == EscapeMode::LogPlus;
                let m = t1.norm().max(t2.norm());
                let (u1, u2) = (t1 / m, t2 / m);
                let shift = m.ln();
                let raw = match seq.lognorms_complex(n, u1, u2) {
                    Some(acc) => acc[1..].to_vec(),
                    None => direct_lognorms(seq, n, u1, u2)?,
                };
                let levels = raw
                    .iter()
                    .zip(&degrees)
                    .map(|(&l, &d)| {
                        if plus {
                            (l + d as f64 * shift).max(0.0) / d as f64
                        } else {
                            l / d as f64 + shift
                        }
                    })
                    .collect();
                Ok(EscapeLevels { place: v, degrees, levels, log_p_coeffs: None })
            }
        }
    }

    /// The level-`n_max` term with a certified error when increment bounds
    /// are available, else the stabilization envelope.
    fn finish_rate(&self, levels: &EscapeLevels, tail: Option<&TailData>) -> PotentialValue {
        let n = levels.levels.len();
        let bounds = match (self.escape_mode(), tail) {
            (EscapeMode::LogPlain, Some(td)) => increment_bounds(td, levels.place),
            _ => None,
        };
        let Some((lo, hi)) = bounds else {
            return heuristic(levels, n);
        };
        let dn = *levels.degrees.last().unwrap();
        let d = dn as f64;
        match (levels.place, &levels.log_p_coeffs) {
            (Place::Finite(p), Some(coeffs)) => {
                let mid = Rational::new((lo + hi) as i64, 2 * dn as i64).expect("positive degree");
                let coeff = &coeffs[n - 1] + &mid;
                PotentialValue::log_p(coeff, p, (hi - lo) / (2.0 * d) * p.ln(), Provenance::StabilizedValuation)
            }
            _ => {
                let value = levels.last() + (lo + hi) / (2.0 * d);
                let err = (hi - lo) / (2.0 * d) + ROUNDING * (1.0 + value.abs());
                PotentialValue::new(value, err, Provenance::SeriesTail)
            }
        }
    }

    /// `G_v^s` at a point: the level-`n_max` term with its error.
    ///
    /// At rational points with a uniform recursion tail (and the plain
    /// logarithm) the error is a certified bound from the per-step
    /// increment bounds; elsewhere it is a geometric-stabilization envelope.
    pub fn escape_rate(&self, s: CriticalSign, v: Place, point: &FormPoint) -> Result<PotentialValue, PotentialError> {
        self.require_depth()?;
        match point {
            FormPoint::Rational(t1, t2) => Ok(self.escape_rates_rational(s, &[v], t1, t2)?.remove(0)),
            FormPoint::Complex(..) => Ok(self.finish_rate(&self.escape_levels(s, v, point)?, None)),
        }
    }

    /// `G_v^s(t1, t2)` at several places, evaluating `F_k` once.
    pub fn escape_rates_rational(
        &self,
        s: CriticalSign,
        places: &[Place],
        t1: &Rational,
        t2: &Rational,
    ) -> Result<Vec<PotentialValue>, PotentialError> {
        self.require_depth()?;
        if t1.is_zero() && t2.is_zero() {
            return Err(PotentialError::ZeroPoint);
        }
        let rp = self.rational_point(s, t1, t2);
        let td = tail_data(self.sequence(s), &rp.x1, &rp.x2);
        places
            .iter()
            .map(|&v| Ok(self.finish_rate(&self.rational_levels(s, v, &rp)?, td.as_ref())))
            .collect()
    }
}

/// Stabilization envelope from the last three terms.
fn heuristic(levels: &EscapeLevels, n: usize) -> PotentialValue {
    let e = &levels.levels;
    let en = e[n - 1];
    let d1 = (en - e[n - 2]).abs();
    let d2 = if n >= 3 { (e[n - 2] - e[n - 3]).abs() } else { d1 };
    let dn = *levels.degrees.last().unwrap() as f64;
    let mut out = match levels.place {
        Place::Archimedean => {
            let rho = if n < 3 {
                0.9
            } else if d2 == 0.0 {
                0.5
            } else {
                (d1 / d2).clamp(0.5, 0.9)
            };
            let err = 2.0 * d1.max(rho * d2) * rho / (1.0 - rho) + ROUNDING * (1.0 + en.abs());
            PotentialValue::new(en, err, Provenance::Extrapolated)
        }
        Place::Finite(p) => {
            let err = d1.max(d2) + (p.ln() + ((n + 2) as f64).ln()) / dn;
            PotentialValue::new(en, err, Provenance::Extrapolated)
        }
    };
    if let (Place::Finite(p), Some(c)) = (levels.place, &levels.log_p_coeffs) {
        let err = out.error;
        out = PotentialValue::log_p(c[n - 1].clone(), p, err, Provenance::Extrapolated);
    }
    out
}

/// Level-by-level evaluation of the stored forms, for points where the
/// recursion divides by zero.
fn direct_lognorms(seq: &FnSequence, n: usize, u1: Complex64, u2: Complex64) -> Result<Vec<f64>, PotentialError> {
    let point = FormPoint::Complex(u1, u2);
    let mut out = Vec::with_capacity(n);
    for e in &seq.entries()[1..=n] {
        let l = e.pair.eval_lognorm(&point, Place::Archimedean)?.value;
        if !l.is_finite() {
            return Err(PotentialError::Numerical(format!("({u1}, {u2})")));
        }
        out.push(l);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::per1::{Lambda, Lift};

    fn fam(n: usize) -> Family {
        Family::new(&Lambda::from_i64(2).unwrap(), Lift::Standard, n, EscapeMode::LogPlain).unwrap()
    }

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn rp(a: &str, b: &str) -> FormPoint {
        FormPoint::Rational(q(a), q(b))
    }

    #[test]
    fn primitive_representative() {
        let (x1, x2, a) = primitive_rep(&q("2/3"), &q("4/9"));
        assert_eq!((x1, x2), (BigInt::from(3), BigInt::from(2)));
        assert_eq!(a, q("2/9"));
    }

    #[test]
    fn archimedean_value_at_zero_one() {
        let f = fam(8);
        let g = f.escape_rate(CriticalSign::Plus, Place::Archimedean, &rp("0", "1")).unwrap();
        assert_eq!(g.tag, Provenance::SeriesTail);
        assert!(g.contains(2.0 * 2f64.ln(), 0.0), "{g:?}");
        assert!(g.error < 0.02);
    }

    #[test]
    fn finite_zero_at_good_primes() {
        let f = fam(8);
        for p in [3u64, 5, 7] {
            let v = Place::finite(p).unwrap();
            let g = f.escape_rate(CriticalSign::Plus, v, &rp("0", "1")).unwrap();
            assert_eq!(g.error, 0.0);
            assert_eq!(g.log_p.unwrap().coeff, Rational::zero());
        }
    }

    #[test]
    fn homogeneity_is_exact_at_finite_places() {
        let f = fam(6);
        let v = Place::finite(3).unwrap();
        let a = f.escape_rate(CriticalSign::Plus, v, &rp("1", "2")).unwrap();
        let b = f.escape_rate(CriticalSign::Plus, v, &rp("9/5", "18/5")).unwrap();
        let diff = &b.log_p.unwrap().coeff - &a.log_p.unwrap().coeff;
        assert_eq!(diff, Rational::from(-2));
    }

    #[test]
    fn complex_agrees_with_rational() {
        let f = fam(7);
        for (a, b) in [("1", "3"), ("-4", "3"), ("5", "-2"), ("1", "0")] {
            let r = f.escape_levels(CriticalSign::Minus, Place::Archimedean, &rp(a, b)).unwrap();
            let c = FormPoint::Complex(Complex64::new(q(a).to_f64(), 0.0), Complex64::new(q(b).to_f64(), 0.0));
            let z = f.escape_levels(CriticalSign::Minus, Place::Archimedean, &c).unwrap();
            for (x, y) in r.levels.iter().zip(&z.levels) {
                assert!((x - y).abs() < 1e-9, "{a}/{b}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn log_plus_clamps() {
        let f = Family::new(&Lambda::from_i64(2).unwrap(), Lift::Standard, 5, EscapeMode::LogPlus).unwrap();
        let v = Place::finite(3).unwrap();
        let g = f.escape_levels(CriticalSign::Plus, v, &rp("1", "0")).unwrap();
        assert!(g.levels.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn origin_is_rejected() {
        let f = fam(3);
        assert_eq!(
            f.escape_rate(CriticalSign::Plus, Place::Archimedean, &rp("0", "0")),
            Err(PotentialError::ZeroPoint)
        );
    }
}
