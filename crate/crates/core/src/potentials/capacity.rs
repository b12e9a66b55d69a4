//! Homogeneous capacities `cap(M_v) = lim |Res(F_n)|_v^(-1/d_n^2)` and
//! inner/outer radii of the filled sets `M_v = {G_v <= 0}`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::escape::ROUNDING;
use super::{Family, PotentialError, PotentialValue, Provenance};
use crate::numeric::log_abs_bigint;
use crate::per1::CriticalSign;
use crate::polyforms::FormPoint;
use crate::qfield::{valuation_bigint, Place, Rational};

/// The sequence `log c_n = -log |Res(F_n)|_v / d_n^2` and its limit estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapacityEstimate {
    pub place: Place,
    pub sign: CriticalSign,
    /// `c_n` for `n = 1..=n_max`.
    pub terms: Vec<f64>,
    /// `log c_n` for `n = 1..=n_max`.
    pub log_terms: Vec<f64>,
    /// Estimate of `log cap(M_v)`.
    pub log_capacity: PotentialValue,
    /// Estimate of `cap(M_v)`.
    pub capacity: PotentialValue,
}

/// Bracket of the filled set between two bidiscs, sampled on the unit
/// max-norm sphere.
///
/// `r_in = exp(-max G)` and `r_out = exp(-min G)` over the samples, so
/// `D(r_in) ⊂ M_v ⊂ D(r_out)` up to sampling; `log_error` bounds the
/// potential errors at the samples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadiiReport {
    pub place: Place,
    pub sign: CriticalSign,
    pub r_in: f64,
    pub r_out: f64,
    pub log_error: f64,
    pub samples: usize,
    pub capacity: PotentialValue,
}

impl RadiiReport {
    /// Radii of the normalised set `{G + 1/2 log cap <= 0}`.
    pub fn normalized(&self) -> (f64, f64) {
        let s = self.capacity.value.sqrt();
        (self.r_in / s, self.r_out / s)
    }

    /// `r_in <= sqrt(cap) <= r_out` with every reported error folded in.
    pub fn sandwich_holds(&self) -> bool {
        let half_log_cap = 0.5 * self.capacity.value.ln();
        let cap_err = 0.5 * self.capacity.error / self.capacity.value;
        let slack = self.log_error + cap_err + 1e-12;
        self.r_in.ln() <= half_log_cap + slack && half_log_cap <= self.r_out.ln() + slack
    }
}

/// Stabilization envelope for a sequence approaching its limit roughly
/// geometrically.
pub(crate) fn extrapolation_error(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::INFINITY;
    }
    let d1 = (xs[n - 1] - xs[n - 2]).abs();
    let d2 = if n >= 3 { (xs[n - 2] - xs[n - 3]).abs() } else { d1 };
    let rho = if n < 3 {
        0.9
    } else if d2 == 0.0 {
        0.5
    } else {
        (d1 / d2).clamp(0.5, 0.9)
    };
    2.0 * d1.max(rho * d2) * rho / (1.0 - rho)
}

impl Family {
    /// Capacity of `M_v^s` from the resultants of `F_1..F_{n_max}`.
    pub fn capacity(&self, s: CriticalSign, v: Place) -> Result<CapacityEstimate, PotentialError> {
        let seq = self.sequence(s);
        let n = self.n_max();
        if n < 2 {
            return Err(PotentialError::TooShallow(2));
        }
        let mut log_terms = Vec::with_capacity(n);
        let mut last_coeff = None;
        for k in 1..=n {
            let r = seq.resultant(k)?;
            let d = seq.degree(k)? as f64;
            let lt = match v {
                Place::Archimedean => {
                    if r.sign() == num_bigint::Sign::NoSign {
                        return Err(PotentialError::DegenerateIterate(k));
                    }
                    -log_abs_bigint(r) / (d * d)
                }
                Place::Finite(p) => {
                    let vp = valuation_bigint(r, p).ok_or(PotentialError::DegenerateIterate(k))?;
                    let c = Rational::new(vp as i64, (d * d) as i64).expect("positive degree");
                    let x = c.to_f64() * p.ln();
                    last_coeff = Some(c);
                    x
                }
            };
            log_terms.push(lt);
        }
        let last = *log_terms.last().unwrap();
        let dn = seq.degree(n)? as f64;
        let mut err = extrapolation_error(&log_terms);
        let log_capacity = match (v, last_coeff) {
            (Place::Finite(p), Some(c)) => {
                err += p.ln() / (dn * dn);
                PotentialValue::log_p(c, p, err, Provenance::Extrapolated)
            }
            _ => {
                err += ROUNDING * (1.0 + last.abs());
                PotentialValue::new(last, err, Provenance::Extrapolated)
            }
        };
        let cap = last.exp();
        // exp is monotone: bracket the exponential of the log interval.
        let cap_err = ((last + err).exp() - cap).max(cap - (last - err).exp());
        let capacity = PotentialValue::new(cap, cap_err, Provenance::Extrapolated);
        let terms = log_terms.iter().map(|x| x.exp()).collect();
        Ok(CapacityEstimate { place: v, sign: s, terms, log_terms, log_capacity, capacity })
    }

    /// Inner and outer radii from the escape rate on the unit max-norm
    /// sphere.
    ///
    /// At `inf` the sphere is `{(1, w)} ∪ {(w, 1)}` with `|w| <= 1`, sampled
    /// on moduli `j / grid` (`j = 0..=grid`) and arguments `2 pi k / grid`;
    /// doubling `grid` refines the sample set. At `p` the samples are
    /// `(x, 1)` for `x = 0..grid` and `(1, p k)` for `k = 0..grid`.
    pub fn radii(&self, s: CriticalSign, v: Place, grid: usize) -> Result<RadiiReport, PotentialError> {
        let min_grid = if v.is_archimedean() { 64 } else { 2 };
        if grid < min_grid {
            return Err(PotentialError::GridTooSmall(min_grid));
        }
        let capacity = self.capacity(s, v)?.capacity;
        let points: Vec<FormPoint> = match v {
            Place::Archimedean => {
                let mut pts = Vec::with_capacity(2 * (grid + 1) * grid);
                for j in 0..=grid {
                    let r = j as f64 / grid as f64;
                    for k in 0..grid {
                        let w = Complex64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / grid as f64);
                        let one = Complex64::new(1.0, 0.0);
                        pts.push(FormPoint::Complex(one, w));
                        pts.push(FormPoint::Complex(w, one));
                        if j == 0 {
                            break;
                        }
                    }
                }
                pts
            }
            Place::Finite(p) => {
                let mut pts = Vec::with_capacity(2 * grid + 1);
                for x in 0..grid as i64 {
                    pts.push(FormPoint::Rational(Rational::from(x), Rational::one()));
                }
                for k in 0..grid as i64 {
                    pts.push(FormPoint::Rational(Rational::one(), Rational::from(p.get() as i64 * k)));
                }
                pts
            }
        };
        let values: Vec<PotentialValue> =
            points.par_iter().map(|pt| self.escape_rate(s, v, pt)).collect::<Result<_, _>>()?;
        let max_g = values.iter().map(|g| g.value).fold(f64::NEG_INFINITY, f64::max);
        let min_g = values.iter().map(|g| g.value).fold(f64::INFINITY, f64::min);
        let log_error = values.iter().map(|g| g.error).fold(0.0, f64::max);
        Ok(RadiiReport {
            place: v,
            sign: s,
            r_in: (-max_g).exp(),
            r_out: (-min_g).exp(),
            log_error,
            samples: values.len(),
            capacity,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::per1::{Lambda, Lift};
    use crate::potentials::EscapeMode;

    fn fam(n: usize) -> Family {
        Family::new(&Lambda::from_i64(2).unwrap(), Lift::Standard, n, EscapeMode::LogPlain).unwrap()
    }

    #[test]
    fn first_terms() {
        let f = fam(4);
        let c = f.capacity(CriticalSign::Plus, Place::Archimedean).unwrap();
        assert!((c.terms[0] - 0.5).abs() < 1e-15);
        assert!((c.terms[1] - 192f64.powf(-0.25)).abs() < 1e-14);
        let c3 = f.capacity(CriticalSign::Plus, Place::finite(3).unwrap()).unwrap();
        assert!((c3.terms[1] - 3f64.powf(0.25)).abs() < 1e-14);
        assert_eq!(c3.terms[0], 1.0);
    }

    #[test]
    fn archimedean_limit() {
        let f = fam(8);
        let c = f.capacity(CriticalSign::Plus, Place::Archimedean).unwrap();
        assert!((c.log_terms[7] - (-1.72414)).abs() < 1e-4);
        assert!(c.log_capacity.contains(-1.7296, 0.0), "{:?}", c.log_capacity);
    }

    #[test]
    fn radii_sandwich_and_ordering() {
        let f = fam(6);
        for s in CriticalSign::BOTH {
            for v in [Place::Archimedean, Place::finite(3).unwrap(), Place::finite(5).unwrap()] {
                let r = f.radii(s, v, 64).unwrap();
                assert!(r.sandwich_holds(), "{r:?}");
                let (ni, no) = r.normalized();
                assert!(ni <= 1.0 + 1e-9 && no >= 1.0 - 1e-9, "{r:?}");
            }
        }
    }

    #[test]
    fn refinement_is_monotone() {
        let f = fam(5);
        let a = f.radii(CriticalSign::Plus, Place::Archimedean, 64).unwrap();
        let b = f.radii(CriticalSign::Plus, Place::Archimedean, 128).unwrap();
        assert!(b.r_in <= a.r_in && b.r_out >= a.r_out);
    }
}
