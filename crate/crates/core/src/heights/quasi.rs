//! Quasi-adelic heights `h_{mu^s}(t) = sum_v G_{mu_v^s}(t, 1)` truncated to
//! `{inf} ∪ {p <= P}`, and the combined height of an averaged measure.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use super::{HeightError, HeightMethod, HeightReport, PlaceContribution};
use crate::numeric::{log_abs_bigint, log_biguint};
use crate::per1::CriticalSign;
use crate::potentials::{Family, MeasureSpec, PotentialValue, Provenance};
use crate::qfield::{rough_part, valuation_bigint, Place, Rational};

/// `log` of the part of `|n|` coprime to every prime `<= bound`.
fn log_rough(n: &BigInt, bound: u64) -> f64 {
    if n.is_zero() {
        return 0.0;
    }
    log_biguint(&rough_part(n.magnitude(), bound))
}

/// `h_{mu^s}` at `t`.
pub fn quasi_adelic_height(family: &Family, t: &Rational, s: CriticalSign, p_bound: u64) -> Result<HeightReport, HeightError> {
    quasi_adelic_height_at(family, t, &Rational::one(), s, p_bound)
}

/// `h_{mu^s}` of the point with lift `(t1, t2)`.
///
/// Every place is evaluated at the primitive integral representative `x`,
/// so the truncated sum does not depend on the lift. Each place contributes
/// `G_v(x) + 1/2 log c_{n,v}` with the level-`n` capacity term
/// `log c_{n,v} = -log |Res(F_n)|_v / d_n^2`; because these terms sum to
/// zero over all places, the capacity part of the truncation error is
/// exactly `log rough_P(Res(F_n)) / (2 d_n^2)`. The escape part over
/// `p > P` is `-log rough_P(gcd F_n(x)) / d_n` at level `n` plus the
/// increment bounds beyond it.
pub fn quasi_adelic_height_at(
    family: &Family,
    t1: &Rational,
    t2: &Rational,
    s: CriticalSign,
    p_bound: u64,
) -> Result<HeightReport, HeightError> {
    if p_bound < 2 {
        return Err(HeightError::InvalidPrimeBound);
    }
    if t2.is_zero() && t1.is_zero() {
        return Err(crate::potentials::PotentialError::ZeroPoint.into());
    }
    let (x1, x2) = primitive(t1, t2);
    let (xr1, xr2) = (Rational::from(x1.clone()), Rational::from(x2.clone()));
    let places = Place::up_to(p_bound);
    let rates = family.escape_rates_rational(s, &places, &xr1, &xr2)?;
    let seq = family.sequence(s);
    let n = family.n_max();
    let res = seq.resultant(n)?;
    let dn = seq.degree(n)? as i64;
    let d2 = dn * dn;
    let mut contributions = Vec::with_capacity(places.len());
    for (v, g) in places.iter().zip(rates) {
        let half_cap = match v {
            Place::Archimedean => PotentialValue::exact(-log_abs_bigint(res) / (2.0 * d2 as f64)),
            Place::Finite(p) => {
                let vp = valuation_bigint(res, *p).ok_or(crate::potentials::PotentialError::DegenerateIterate(n))?;
                PotentialValue::log_p(Rational::new(vp as i64, 2 * d2).expect("nonzero"), *p, 0.0, Provenance::Exact)
            }
        };
        contributions.push(PlaceContribution { place: *v, value: g.add(&half_cap) });
    }
    // Everything outside the listed places.
    let cap_tail = log_rough(res, p_bound) / (2.0 * d2 as f64);
    let values = seq.values_integer(&x1, &x2);
    let (an, bn) = &values[n];
    let escape_tail = -log_rough(&an.gcd(bn), p_bound) / dn as f64;
    let centre = cap_tail + escape_tail;
    let (lo, hi) = match crate::potentials::tail_data_for(family, s, &x1, &x2) {
        Some((content, gx, r)) => {
            let lcg = log_rough(&(content * gx), p_bound);
            let lr = log_rough(&r, p_bound);
            (centre + (lcg - lr) / dn as f64, centre + lcg / dn as f64)
        }
        None => {
            // No uniform recursion: compare with the previous level.
            let (a1, b1) = &values[n - 1];
            let prev = -log_rough(&a1.gcd(b1), p_bound) / seq.degree(n - 1)? as f64;
            let w = 2.0 * (escape_tail - prev).abs();
            (centre - w, centre + w)
        }
    };
    let tail = lo.abs().max(hi.abs());
    let t = if t2.is_zero() { Rational::zero() } else { t1.checked_div(t2)? };
    Ok(HeightReport::assemble(t, s, HeightMethod::QuasiAdelic, contributions, Some(p_bound), tail))
}

fn primitive(t1: &Rational, t2: &Rational) -> (BigInt, BigInt) {
    let d = t1.denom().lcm(t2.denom());
    let x1 = t1.numer() * (&d / t1.denom());
    let x2 = t2.numer() * (&d / t2.denom());
    let g = x1.gcd(&x2);
    (x1 / &g, x2 / &g)
}

/// `h_mu(t) = sum_s w_s h_{mu^s}(t) - L`.
pub fn combined_height(
    family: &Family,
    t: &Rational,
    spec: &MeasureSpec,
    p_bound: u64,
    l_hat: &PotentialValue,
) -> Result<PotentialValue, HeightError> {
    let mut acc = l_hat.neg();
    for (s, w) in spec.support() {
        let h = quasi_adelic_height(family, t, s, p_bound)?;
        acc = acc.add(&h.total.scale(&w));
    }
    acc.log_p = None;
    Ok(acc)
}
