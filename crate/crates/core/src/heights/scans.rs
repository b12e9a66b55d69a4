//! PCF detection, the Weil-height sandwich and small-height scans.

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use super::{quasi_adelic_height, HeightError};
use crate::heights::combined_height;
use crate::per1::{critical_orbit, CriticalSign, Lambda, OrbitOptions};
use crate::potentials::{Family, MeasureSpec, PotentialValue};
use crate::qfield::{weil_height, Place, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PcfStatus {
    #[serde(rename = "PCF")]
    Pcf,
    #[serde(rename = "NotPCF")]
    NotPcf,
    Unknown,
}

/// Classifies each `t`: PCF when both critical orbits repeat exactly,
/// NotPCF when either orbit certifiably escapes, Unknown otherwise.
pub fn pcf_scan(lambda: &Lambda, grid: &[Rational], budget: usize) -> Vec<(Rational, PcfStatus)> {
    let opts = OrbitOptions::default();
    grid.par_iter()
        .map(|t| {
            let orbits = CriticalSign::BOTH.map(|s| critical_orbit(lambda, t, s, budget, &opts));
            let status = if orbits.iter().all(|o| o.is_preperiodic()) {
                PcfStatus::Pcf
            } else if orbits.iter().any(|o| o.escape_certified_at.is_some()) {
                PcfStatus::NotPcf
            } else {
                PcfStatus::Unknown
            };
            (t.clone(), status)
        })
        .collect()
}

/// One sample of the sandwich `sum_v log r_in,v <= h(t) - h_mu(t) <= sum_v log r_out,v`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichRow {
    pub t: Rational,
    pub weil_height: f64,
    pub height: PotentialValue,
    /// `h(t) - h_mu(t)`.
    pub difference: f64,
    /// Bracket with every error folded in.
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichReport {
    pub sign: CriticalSign,
    #[serde(rename = "P")]
    pub prime_bound: u64,
    /// `(sum log r_in, sum log r_out)` of the normalised sets over the listed places.
    pub log_radii: (f64, f64),
    pub rows: Vec<SandwichRow>,
}

impl SandwichReport {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }
}

/// Checks the Weil-height sandwich at each sample.
///
/// Normalised radii are sampled per place (`grid` at `inf`, `2p` at `p`);
/// their potential and capacity errors, the height's own error and the
/// quasi-adelic tail widen the bracket.
pub fn sandwich_check(
    family: &Family,
    s: CriticalSign,
    samples: &[Rational],
    p_bound: u64,
    grid: usize,
) -> Result<SandwichReport, HeightError> {
    if p_bound < 2 {
        return Err(HeightError::InvalidPrimeBound);
    }
    let places = Place::up_to(p_bound);
    let brackets: Vec<(f64, f64, f64)> = places
        .par_iter()
        .map(|&v| {
            let g = match v {
                Place::Archimedean => grid,
                Place::Finite(p) => 2 * p.get() as usize,
            };
            let r = family.radii(s, v, g)?;
            let (ri, ro) = r.normalized();
            let slack = r.log_error + 0.5 * r.capacity.error / r.capacity.value;
            Ok((ri.ln(), ro.ln(), slack))
        })
        .collect::<Result<_, HeightError>>()?;
    let log_in: f64 = brackets.iter().map(|b| b.0).sum();
    let log_out: f64 = brackets.iter().map(|b| b.1).sum();
    let slack: f64 = brackets.iter().map(|b| b.2).sum();
    let rows = samples
        .par_iter()
        .map(|t| {
            let h = quasi_adelic_height(family, t, s, p_bound)?;
            let w = weil_height(t);
            let difference = w - h.total.value;
            let lower = log_in - slack - h.total.error - 1e-12;
            let upper = log_out + slack + h.total.error + 1e-12;
            Ok(SandwichRow {
                t: t.clone(),
                weil_height: w,
                height: h.total,
                difference,
                lower,
                upper,
                holds: lower <= difference && difference <= upper,
            })
        })
        .collect::<Result<_, HeightError>>()?;
    Ok(SandwichReport { sign: s, prime_bound: p_bound, log_radii: (log_in, log_out), rows })
}

/// Every rational `a/b` with `max(|a|, b) <= bound`, by increasing height
/// level `max(|a|, b)` and then by value.
pub fn rationals_by_height(bound: u64) -> Vec<Rational> {
    let mut out = vec![Rational::zero()];
    for h in 1..=bound as i64 {
        let mut level = Vec::new();
        // Numerator at the level: |a| = h, b <= h.
        for b in 1..=h {
            if h.gcd(&b) == 1 {
                level.push(Rational::new(h, b).expect("b > 0"));
                level.push(Rational::new(-h, b).expect("b > 0"));
            }
        }
        // Denominator at the level: b = h, |a| < h.
        for a in 1..h {
            if a.gcd(&h) == 1 {
                level.push(Rational::new(a, h).expect("h > 0"));
                level.push(Rational::new(-a, h).expect("h > 0"));
            }
        }
        level.sort();
        out.extend(level);
    }
    out
}

/// A parameter whose combined height falls below `-delta`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FinitenessHit {
    pub t: Rational,
    pub height: PotentialValue,
    /// The whole error interval lies below `-delta`.
    pub certified: bool,
}

/// Rationals of height at most `log bound` whose combined height is below `-delta`.
pub fn finiteness_scan(
    family: &Family,
    spec: &MeasureSpec,
    delta: f64,
    bound: u64,
    p_bound: u64,
    l_hat: &PotentialValue,
) -> Result<Vec<FinitenessHit>, HeightError> {
    if !(delta > 0.0) {
        return Err(HeightError::InvalidDelta);
    }
    let ts = rationals_by_height(bound);
    let heights: Vec<Option<PotentialValue>> = ts
        .par_iter()
        .map(|t| match combined_height(family, t, spec, p_bound, l_hat) {
            Ok(h) => Ok(Some(h)),
            // Parameters where the map degenerates are skipped.
            Err(HeightError::Potential(_)) | Err(HeightError::DegenerateParameter) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_, HeightError>>()?;
    Ok(ts
        .into_iter()
        .zip(heights)
        .filter_map(|(t, h)| {
            let h = h?;
            (h.value < -delta).then(|| FinitenessHit { certified: h.value + h.error < -delta, t, height: h })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::per1::Lift;
    use crate::potentials::{EscapeMode, Provenance};

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn two() -> Lambda {
        Lambda::from_i64(2).unwrap()
    }

    fn fam(n: usize) -> Family {
        Family::new(&two(), Lift::Standard, n, EscapeMode::LogPlain).unwrap()
    }

    #[test]
    fn pcf_examples() {
        let r = pcf_scan(&two(), &[q("0"), q("-4/3"), q("1")], 40);
        assert_eq!(r[0].1, PcfStatus::Pcf);
        assert_ne!(r[1].1, PcfStatus::Pcf);
        assert_ne!(r[2].1, PcfStatus::Pcf);
    }

    #[test]
    fn enumeration_order() {
        let r = rationals_by_height(2);
        let s: Vec<String> = r.iter().map(|x| x.to_string()).collect();
        assert_eq!(s, ["0", "-1", "1", "-2", "-1/2", "1/2", "2"]);
        let r = rationals_by_height(10);
        for w in r.windows(2) {
            assert!(weil_height(&w[0]) <= weil_height(&w[1]) + 1e-15);
        }
        let mut dedup = r.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), r.len());
    }

    #[test]
    fn sandwich_examples() {
        let f = fam(6);
        let rep = sandwich_check(&f, CriticalSign::Plus, &[q("0"), q("3"), q("-4/3")], 20, 64).unwrap();
        assert!(rep.log_radii.0 <= 1e-9 && rep.log_radii.1 >= -1e-9);
        assert!(rep.all_hold(), "{rep:?}");
    }

    #[test]
    fn finiteness_monotone_and_validates() {
        let f = fam(6);
        let l = PotentialValue::new(0.27, 0.01, Provenance::Jackknife);
        let spec = MeasureSpec::average();
        let a = finiteness_scan(&f, &spec, 0.135, 3, 30, &l).unwrap();
        assert!(a.iter().any(|h| h.t.is_zero()));
        let b = finiteness_scan(&f, &spec, 0.2, 3, 30, &l).unwrap();
        assert!(b.iter().all(|h| a.iter().any(|x| x.t == h.t)));
        assert!(finiteness_scan(&f, &spec, 0.0, 3, 30, &l).is_err());
    }
}
