//! Normalised potentials, Arakelov–Green functions, energies and `L`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{Family, PotentialError, PotentialValue, Provenance};
use crate::per1::{CriticalSign, ParameterSet};
use crate::polyforms::FormPoint;
use crate::qfield::{log_abs, Place, Rational};

/// A function `G` on the punctured plane with `G(a x) = G(x) + log |a|_v`.
pub trait HomogeneousPotential: Sync {
    fn place(&self) -> Place;
    fn eval(&self, point: &FormPoint) -> Result<PotentialValue, PotentialError>;
}

/// `G(x) = log ||x||_v`, the potential of the unit bidisc (capacity 1).
#[derive(Clone, Copy, Debug)]
pub struct ReferencePotential {
    pub place: Place,
}

impl HomogeneousPotential for ReferencePotential {
    fn place(&self) -> Place {
        self.place
    }

    fn eval(&self, point: &FormPoint) -> Result<PotentialValue, PotentialError> {
        if point.is_origin() {
            return Err(PotentialError::ZeroPoint);
        }
        match (point, self.place) {
            (FormPoint::Rational(a, b), v) => {
                let la = if a.is_zero() { None } else { Some(log_abs(a, v)?) };
                let lb = if b.is_zero() { None } else { Some(log_abs(b, v)?) };
                let m = match (la, lb) {
                    (Some(x), Some(y)) => {
                        if x.value >= y.value {
                            x
                        } else {
                            y
                        }
                    }
                    (Some(x), None) | (None, Some(x)) => x,
                    (None, None) => unreachable!(),
                };
                Ok(match (v, m.log_p_multiple) {
                    (Place::Finite(p), Some(k)) => PotentialValue::log_p(Rational::from(k), p, 0.0, Provenance::Exact),
                    _ => PotentialValue::exact(m.value),
                })
            }
            (FormPoint::Complex(a, b), Place::Archimedean) => Ok(PotentialValue::exact(a.norm().max(b.norm()).ln())),
            (FormPoint::Complex(..), Place::Finite(_)) => {
                Err(PotentialError::Poly(crate::polyforms::PolyError::ComplexAtFinitePlace))
            }
        }
    }
}

/// `G_{mu_v^s} = G_v^s + 1/2 log cap(M_v^s)`, whose filled set has capacity 1.
#[derive(Clone, Debug)]
pub struct NormalizedPotential<'a> {
    family: &'a Family,
    sign: CriticalSign,
    place: Place,
    half_log_cap: PotentialValue,
}

impl<'a> NormalizedPotential<'a> {
    pub fn new(family: &'a Family, sign: CriticalSign, place: Place) -> Result<Self, PotentialError> {
        let half = family.capacity(sign, place)?.log_capacity.scale(&Rational::new(1, 2).expect("nonzero"));
        Ok(NormalizedPotential { family, sign, place, half_log_cap: half })
    }

    pub fn sign(&self) -> CriticalSign {
        self.sign
    }

    pub fn half_log_capacity(&self) -> &PotentialValue {
        &self.half_log_cap
    }
}

impl HomogeneousPotential for NormalizedPotential<'_> {
    fn place(&self) -> Place {
        self.place
    }

    fn eval(&self, point: &FormPoint) -> Result<PotentialValue, PotentialError> {
        Ok(self.family.escape_rate(self.sign, self.place, point)?.add(&self.half_log_cap))
    }
}

/// Rational weights on the two critical signs, summing to exactly 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MeasureSpec {
    pub plus: Rational,
    pub minus: Rational,
}

impl MeasureSpec {
    pub fn new(plus: Rational, minus: Rational) -> Result<Self, PotentialError> {
        let zero = Rational::zero();
        if plus < zero || minus < zero {
            return Err(PotentialError::InvalidWeights("weights must be nonnegative".into()));
        }
        if &plus + &minus != Rational::one() {
            return Err(PotentialError::InvalidWeights(format!("{plus} + {minus} != 1")));
        }
        Ok(MeasureSpec { plus, minus })
    }

    /// All weight on one sign.
    pub fn pure(s: CriticalSign) -> Self {
        match s {
            CriticalSign::Plus => MeasureSpec { plus: Rational::one(), minus: Rational::zero() },
            CriticalSign::Minus => MeasureSpec { plus: Rational::zero(), minus: Rational::one() },
        }
    }

    /// `mu = 1/2 mu^+ + 1/2 mu^-`.
    pub fn average() -> Self {
        let h = Rational::new(1, 2).expect("nonzero");
        MeasureSpec { plus: h.clone(), minus: h }
    }

    pub fn weight(&self, s: CriticalSign) -> &Rational {
        match s {
            CriticalSign::Plus => &self.plus,
            CriticalSign::Minus => &self.minus,
        }
    }

    /// Signs with positive weight.
    pub fn support(&self) -> Vec<(CriticalSign, Rational)> {
        CriticalSign::BOTH
            .into_iter()
            .filter(|&s| !self.weight(s).is_zero())
            .map(|s| (s, self.weight(s).clone()))
            .collect()
    }

    pub fn is_pure(&self) -> bool {
        self.support().len() == 1
    }
}

/// `sum_i w_i G_{mu_i}`; not renormalised.
#[derive(Clone, Debug)]
pub struct CombinedPotential<'a> {
    parts: Vec<(Rational, NormalizedPotential<'a>)>,
    place: Place,
}

impl<'a> CombinedPotential<'a> {
    pub fn new(family: &'a Family, spec: &MeasureSpec, place: Place) -> Result<Self, PotentialError> {
        let parts = spec
            .support()
            .into_iter()
            .map(|(s, w)| Ok((w, NormalizedPotential::new(family, s, place)?)))
            .collect::<Result<_, PotentialError>>()?;
        Ok(CombinedPotential { parts, place })
    }
}

impl HomogeneousPotential for CombinedPotential<'_> {
    fn place(&self) -> Place {
        self.place
    }

    fn eval(&self, point: &FormPoint) -> Result<PotentialValue, PotentialError> {
        let mut acc: Option<PotentialValue> = None;
        for (w, pot) in &self.parts {
            let term = pot.eval(point)?.scale(w);
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term),
            });
        }
        Ok(acc.expect("nonempty support"))
    }
}

impl Family {
    /// Weighted sum of normalised potentials at a point.
    pub fn combined_potential(
        &self,
        spec: &MeasureSpec,
        v: Place,
        point: &FormPoint,
    ) -> Result<PotentialValue, PotentialError> {
        CombinedPotential::new(self, spec, v)?.eval(point)
    }
}

/// `log |x1 y2 - x2 y1|_v`, `None` on the diagonal.
fn log_wedge(x: &FormPoint, y: &FormPoint, v: Place) -> Result<Option<PotentialValue>, PotentialError> {
    match (x, y) {
        (FormPoint::Rational(x1, x2), FormPoint::Rational(y1, y2)) => {
            let w = &(x1 * y2) - &(x2 * y1);
            if w.is_zero() {
                return Ok(None);
            }
            let l = log_abs(&w, v)?;
            Ok(Some(match (v, l.log_p_multiple) {
                (Place::Finite(p), Some(k)) => PotentialValue::log_p(Rational::from(k), p, 0.0, Provenance::Exact),
                _ => PotentialValue::exact(l.value),
            }))
        }
        _ => {
            if !v.is_archimedean() {
                return Err(PotentialError::Poly(crate::polyforms::PolyError::ComplexAtFinitePlace));
            }
            let (x1, x2) = to_complex(x);
            let (y1, y2) = to_complex(y);
            let w = x1 * y2 - x2 * y1;
            if w.norm() == 0.0 {
                return Ok(None);
            }
            Ok(Some(PotentialValue::exact(w.norm().ln())))
        }
    }
}

fn to_complex(p: &FormPoint) -> (Complex64, Complex64) {
    match p {
        FormPoint::Complex(a, b) => (*a, *b),
        FormPoint::Rational(a, b) => (Complex64::new(a.to_f64(), 0.0), Complex64::new(b.to_f64(), 0.0)),
    }
}

/// `g(x, y) = -log |x ∧ y|_v + G(x) + G(y)`; `+inf` on the diagonal.
///
/// Independent of the lifts; at finite places with rational lifts the
/// `ln p` bookkeeping is exact.
pub fn green(pot: &dyn HomogeneousPotential, x: &FormPoint, y: &FormPoint) -> Result<PotentialValue, PotentialError> {
    if x.is_origin() || y.is_origin() {
        return Err(PotentialError::ZeroPoint);
    }
    let Some(lw) = log_wedge(x, y, pot.place())? else {
        return Ok(PotentialValue::exact(f64::INFINITY));
    };
    Ok(lw.neg().add(&pot.eval(x)?).add(&pot.eval(y)?))
}

/// `(1 / 2|S|^2) sum_{x != y} g(x, y)`, skipping coincident points.
pub fn pair_energy(pot: &dyn HomogeneousPotential, points: &[FormPoint]) -> Result<PotentialValue, PotentialError> {
    let n = points.len();
    if n <= 1 {
        return Ok(PotentialValue::exact(0.0));
    }
    let g: Vec<PotentialValue> = points.par_iter().map(|p| pot.eval(p)).collect::<Result<_, _>>()?;
    let rows: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut sum = 0.0;
            let mut err = 0.0;
            for j in 0..n {
                if i == j {
                    continue;
                }
                if let Some(lw) = log_wedge(&points[i], &points[j], pot.place())? {
                    sum += -lw.value + g[i].value + g[j].value;
                    err += g[i].error + g[j].error;
                }
            }
            Ok((sum, err))
        })
        .collect::<Result<_, PotentialError>>()?;
    let (sum, err) = rows.iter().fold((0.0, 0.0), |(s, e), (a, b)| (s + a, e + b));
    let scale = 1.0 / (2.0 * (n * n) as f64);
    let tag = g.iter().fold(Provenance::Exact, |t, v| t.combine(v.tag));
    Ok(PotentialValue::new(sum * scale, err * scale, tag))
}

/// Energy of the points `(z, 1)` at the archimedean place.
pub fn pair_energy_complex(pot: &dyn HomogeneousPotential, zs: &[Complex64]) -> Result<PotentialValue, PotentialError> {
    let pts: Vec<FormPoint> = zs.iter().map(|&z| FormPoint::Complex(z, Complex64::new(1.0, 0.0))).collect();
    pair_energy(pot, &pts)
}

/// Archimedean estimate of `L = 1/2 ∬ sum_i w_i g_{mu_i} dmu dmu` over a
/// proxy for `mu`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LEstimate {
    pub estimate: PotentialValue,
    /// Leave-one-block-out estimates.
    pub block_estimates: Vec<f64>,
    /// Largest potential error over the proxy points.
    pub potential_error: f64,
    pub points: usize,
    pub level: usize,
    pub note: &'static str,
}

impl Family {
    /// `L_inf` from proxy sets `S_n^s` with masses `w_s / |S_n^s|`.
    ///
    /// `L = 0` exactly for a pure measure. The error is a jackknife over
    /// `blocks` deterministic blocks (index mod `blocks` in sorted order).
    pub fn l_estimate(
        &self,
        spec: &MeasureSpec,
        proxies: &[&ParameterSet],
        blocks: usize,
    ) -> Result<LEstimate, PotentialError> {
        const NOTE: &str = "archimedean-only lower-bound evidence";
        let level = proxies.first().map_or(0, |p| p.level);
        if spec.is_pure() {
            return Ok(LEstimate {
                estimate: PotentialValue::exact(0.0),
                block_estimates: Vec::new(),
                potential_error: 0.0,
                points: proxies.iter().map(|p| p.len()).sum(),
                level,
                note: NOTE,
            });
        }
        let mut pts: Vec<(Complex64, f64)> = Vec::new();
        for (s, w) in spec.support() {
            let set = proxies
                .iter()
                .find(|p| p.sign == Some(s))
                .ok_or(PotentialError::EmptyProxy)?;
            if set.is_empty() {
                return Err(PotentialError::EmptyProxy);
            }
            let m = w.to_f64() / set.len() as f64;
            pts.extend(set.points().into_iter().map(|z| (z, m)));
        }
        pts.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
        let n = pts.len();
        let pot = CombinedPotential::new(self, spec, Place::Archimedean)?;
        let one = Complex64::new(1.0, 0.0);
        let g: Vec<PotentialValue> =
            pts.par_iter().map(|(z, _)| pot.eval(&FormPoint::Complex(*z, one))).collect::<Result<_, _>>()?;
        let potential_error = g.iter().map(|v| v.error).fold(0.0, f64::max);
        // Kernel matrix of g_w(x_i, x_j); the weights sum to 1, so the
        // combined potential enters once per endpoint.
        let kernel: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let d = (pts[i].0 - pts[j].0).norm();
                        if i == j || d == 0.0 {
                            0.0
                        } else {
                            -d.ln() + g[i].value + g[j].value
                        }
                    })
                    .collect()
            })
            .collect();
        let estimate_over = |keep: &dyn Fn(usize) -> bool| -> f64 {
            let mass: f64 = (0..n).filter(|&i| keep(i)).map(|i| pts[i].1).sum();
            let mut sum = 0.0;
            for i in (0..n).filter(|&i| keep(i)) {
                let mut row = 0.0;
                for j in (0..n).filter(|&j| keep(j)) {
                    row += pts[j].1 * kernel[i][j];
                }
                sum += pts[i].1 * row;
            }
            0.5 * sum / (mass * mass)
        };
        let full = estimate_over(&|_| true);
        let k = blocks.clamp(2, n.max(2));
        let block_estimates: Vec<f64> = (0..k).map(|b| estimate_over(&|i| i % k != b)).collect();
        let mean = block_estimates.iter().sum::<f64>() / k as f64;
        let var = block_estimates.iter().map(|x| (x - mean).powi(2)).sum::<f64>() * (k - 1) as f64 / k as f64;
        Ok(LEstimate {
            estimate: PotentialValue::new(full, var.sqrt(), Provenance::Jackknife),
            block_estimates,
            potential_error,
            points: n,
            level,
            note: NOTE,
        })
    }
}
