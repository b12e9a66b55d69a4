//! Call–Silverman heights `h^±(t) = lim 2^-n h(f_t^n(±1))`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;

use super::{HeightError, HeightMethod, HeightReport, PlaceContribution};
use crate::numeric::{log_abs_bigint, scaled_f64};
use crate::per1::{critical_orbit, CriticalSign, Lambda, MapLift, OrbitOptions};
use crate::potentials::{PotentialValue, Provenance};
use crate::qfield::{factorize, valuation_bigint, Place, Prime, Rational};

/// Steps of the archimedean local iteration.
const ARCH_STEPS: usize = 60;
/// Target width of a finite local tail, in natural-log units.
const FINITE_TAIL: f64 = 1e-13;

/// The primitive integral lift of `f_t` with its resultant and the
/// logarithms bounding `log ||Phi(z)|| - 2 log ||z||` at `inf`.
struct PrimitiveLift {
    map: MapLift,
    resultant: BigInt,
    log_k: f64,
    log_row: f64,
}

impl PrimitiveLift {
    fn new(lambda: &Lambda, t: &Rational) -> Result<Self, HeightError> {
        let map = MapLift::new(lambda, t).primitive();
        let resultant = map.resultant();
        let k = map.macaulay_constant().ok_or(HeightError::DegenerateParameter)?;
        Ok(PrimitiveLift { log_k: k.to_f64().ln(), log_row: map.log_row_norm(), map, resultant })
    }
}

/// Global route: exact iteration of primitive lifts.
///
/// A detected preperiodic orbit gives exactly `0`. Otherwise the value is
/// `2^-n h(x_n)` recentred by the step bounds
/// `-log K <= h(f(x)) - 2 h(x) <= log ||Phi||_row`, which hold for every
/// primitive integral `x` because `gcd(Phi(x))` divides `Res(Phi)`; the
/// reported error is the resulting certified tail.
pub fn callsilverman_direct(
    lambda: &Lambda,
    t: &Rational,
    s: CriticalSign,
    n: usize,
) -> Result<PotentialValue, HeightError> {
    if n < 4 {
        return Err(HeightError::InvalidDepth(n, 4));
    }
    let opts = OrbitOptions { blowup_h0: f64::INFINITY, stop_at_pole: false };
    let orbit = critical_orbit(lambda, t, s, n, &opts);
    if orbit.is_preperiodic() {
        return Ok(PotentialValue::exact(0.0));
    }
    let lift = PrimitiveLift::new(lambda, t)?;
    let mut z = (BigInt::from(s.value()), BigInt::one());
    for _ in 0..n {
        let (a, b) = lift.map.apply(&z.0, &z.1);
        let g = a.gcd(&b);
        z = (a / &g, b / &g);
    }
    let h = log_abs_bigint(&z.0).max(log_abs_bigint(&z.1));
    let scale = 2f64.powi(-(n as i32));
    let value = h * scale + (lift.log_row - lift.log_k) * scale / 2.0;
    let err = (lift.log_row + lift.log_k) * scale / 2.0 + 1e-14 * (1.0 + value.abs());
    Ok(PotentialValue::new(value, err, Provenance::SeriesTail))
}

/// Local route: `h^s(t) = sum_v G_{Phi,v}(s, 1)` over the places where
/// `Phi_t` has bad reduction; good places contribute exactly `0`.
///
/// At `inf` the normalised iteration runs in floating point; at `p` it runs
/// exactly modulo `p^M`, each step losing at most `v_p(Res)` digits. Both
/// tails are certified from the per-step bounds.
pub fn callsilverman_local(lambda: &Lambda, t: &Rational, s: CriticalSign) -> Result<HeightReport, HeightError> {
    let lift = PrimitiveLift::new(lambda, t)?;
    let mut places = vec![PlaceContribution { place: Place::Archimedean, value: archimedean_local(&lift, s) }];
    let primes = factorize(lift.resultant.magnitude())?;
    for (p, _) in primes {
        let p = u64::try_from(&p).map_err(|_| crate::qfield::QError::PrimeTooLarge(p.to_string()))?;
        let p = Prime::new(p)?;
        places.push(PlaceContribution { place: Place::Finite(p), value: finite_local(&lift, s, p) });
    }
    Ok(HeightReport::assemble(t.clone(), s, HeightMethod::CallSilvermanLocal, places, None, 0.0))
}

fn archimedean_local(lift: &PrimitiveLift, s: CriticalSign) -> PotentialValue {
    let coeffs = |f: &crate::polyforms::BinaryForm| -> [f64; 3] { [0, 1, 2].map(|k| scaled_f64(&f.coeff(k), 0)) };
    let a = coeffs(lift.map.a());
    let b = coeffs(lift.map.b());
    let eval = |c: &[f64; 3], z1: f64, z2: f64| c[0] * z2 * z2 + c[1] * z1 * z2 + c[2] * z1 * z1;
    let (mut z1, mut z2) = (s.value() as f64, 1.0);
    let mut acc = 0.0;
    let mut scale = 1.0;
    for _ in 0..ARCH_STEPS {
        let w1 = eval(&a, z1, z2);
        let w2 = eval(&b, z1, z2);
        let m = w1.abs().max(w2.abs());
        scale *= 0.5;
        acc += scale * m.ln();
        z1 = w1 / m;
        z2 = w2 / m;
    }
    let lo = log_abs_bigint(&lift.resultant) - lift.log_k;
    let hi = lift.log_row;
    let value = acc + scale * (lo + hi) / 2.0;
    let err = scale * (hi - lo) / 2.0 + 1e-13 * (1.0 + value.abs());
    PotentialValue::new(value, err, Provenance::SeriesTail)
}

fn finite_local(lift: &PrimitiveLift, s: CriticalSign, p: Prime) -> PotentialValue {
    let vr = valuation_bigint(&lift.resultant, p).unwrap_or(0) as usize;
    let ln_p = p.ln();
    // Tail after N steps lies in [-v_p(R) 2^-N, 0] ln p.
    let mut steps = 1;
    while vr as f64 * ln_p * 2f64.powi(-(steps as i32 + 1)) > FINITE_TAIL {
        steps += 1;
    }
    let pb = BigInt::from(p.get());
    let mut precision = (steps + 1) * vr + 1;
    let mut modulus = pb.pow(precision as u32);
    let mut z = (BigInt::from(s.value()).mod_floor(&modulus), BigInt::one());
    let mut coeff = Rational::zero();
    let mut weight = Rational::one();
    let half = Rational::new(1, 2).expect("nonzero");
    for _ in 0..steps {
        let (w1, w2) = lift.map.apply(&z.0, &z.1);
        let (w1, w2) = (w1.mod_floor(&modulus), w2.mod_floor(&modulus));
        let m = [&w1, &w2]
            .iter()
            .filter_map(|w| valuation_bigint(w, p))
            .min()
            .expect("precision exceeds v_p(Res)") as usize;
        debug_assert!(m <= vr);
        weight = &weight * &half;
        coeff = &coeff - &(&weight * &Rational::from(m as i64));
        let pm = pb.pow(m as u32);
        precision -= m;
        modulus = pb.pow(precision as u32);
        z = ((w1 / &pm).mod_floor(&modulus), (w2 / &pm).mod_floor(&modulus));
    }
    // Centre the one-sided tail.
    let tail = &weight * &Rational::new(vr as i64, 2).expect("nonzero");
    let coeff = &coeff - &tail;
    PotentialValue::log_p(coeff, p, tail.to_f64() * ln_p, Provenance::SeriesTail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn two() -> Lambda {
        Lambda::from_i64(2).unwrap()
    }

    #[test]
    fn direct_examples() {
        for s in CriticalSign::BOTH {
            let h = callsilverman_direct(&two(), &q("0"), s, 8).unwrap();
            assert_eq!((h.value, h.error, h.tag), (0.0, 0.0, Provenance::Exact));
        }
        let h = callsilverman_direct(&two(), &q("-4/3"), CriticalSign::Plus, 8).unwrap();
        assert_eq!(h.value, 0.0);
        let h = callsilverman_direct(&two(), &q("1"), CriticalSign::Plus, 16).unwrap();
        assert!(h.value > 0.01 && h.error < 1e-3, "{h:?}");
        assert!(callsilverman_direct(&two(), &q("1"), CriticalSign::Plus, 3).is_err());
    }

    #[test]
    fn direct_bracket_shrinks() {
        let a = callsilverman_direct(&two(), &q("1/2"), CriticalSign::Minus, 10).unwrap();
        let b = callsilverman_direct(&two(), &q("1/2"), CriticalSign::Minus, 16).unwrap();
        assert!(b.error < a.error);
        assert!((a.value - b.value).abs() <= a.error + b.error);
    }

    #[test]
    fn local_examples() {
        let r = callsilverman_local(&two(), &q("0"), CriticalSign::Plus).unwrap();
        assert!(r.total.contains(0.0, 0.0), "{r:?}");
        let r = callsilverman_local(&two(), &q("-4/3"), CriticalSign::Plus).unwrap();
        assert!(r.total.contains(0.0, 0.0), "{r:?}");
        let d = callsilverman_direct(&two(), &q("1"), CriticalSign::Plus, 16).unwrap();
        let r = callsilverman_local(&two(), &q("1"), CriticalSign::Plus).unwrap();
        assert!((d.value - r.total.value).abs() < 1e-3);
        assert!((d.value - r.total.value).abs() <= d.error + r.total.error);
    }

    #[test]
    fn local_lists_bad_places_only() {
        let r = callsilverman_local(&two(), &q("5/3"), CriticalSign::Minus).unwrap();
        let lift = PrimitiveLift::new(&two(), &q("5/3")).unwrap();
        for c in &r.places[1..] {
            let p = c.place.prime().unwrap();
            assert!((&lift.resultant % BigInt::from(p.get())).is_zero());
        }
    }
}
