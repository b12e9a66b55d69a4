//! Property tests for the algebraic and analytic invariants.

use num_bigint::BigInt;
use num_complex::Complex64;
use proptest::prelude::*;

use heightlab_core::heights::{callsilverman_direct, pcf_scan, PcfStatus};
use heightlab_core::per1::{build_fn, f_apply_point, CriticalSign, Lambda, Lift, ProjPoint};
use heightlab_core::polyforms::{
    form_gcd, resultant_bareiss, resultant_forms, resultant_subresultant, BinaryForm, FormPoint,
};
use heightlab_core::potentials::{gamma_series, green, EscapeMode, Family, NormalizedPotential};
use heightlab_core::qfield::{
    log_abs, product_formula_residual, support_places, weil_height, Place, Prime, Rational,
};

fn rational() -> impl Strategy<Value = Rational> {
    (-100_000i64..100_000, 1i64..100_000).prop_map(|(a, b)| Rational::new(a, b).unwrap())
}

fn nonzero_rational() -> impl Strategy<Value = Rational> {
    rational().prop_filter("nonzero", |x| !x.is_zero())
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=20).prop_map(|(a, b)| Rational::new(a, b).unwrap())
}

fn prime() -> impl Strategy<Value = Prime> {
    prop::sample::select(vec![2u64, 3, 5, 7, 11, 13, 97]).prop_map(|p| Prime::new(p).unwrap())
}

fn form(d: usize) -> impl Strategy<Value = BinaryForm> {
    prop::collection::vec(-50i64..=50, d + 1).prop_map(|c| BinaryForm::from_i64(&c))
}

fn two() -> Lambda {
    Lambda::from_i64(2).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_formula_is_exact(x in nonzero_rational()) {
        prop_assert!(product_formula_residual(&x).unwrap().is_zero());
    }

    #[test]
    fn log_abs_is_multiplicative(x in nonzero_rational(), y in nonzero_rational(), p in prime()) {
        let xy = &x * &y;
        let v = Place::Finite(p);
        let (a, b, c) = (log_abs(&x, v).unwrap(), log_abs(&y, v).unwrap(), log_abs(&xy, v).unwrap());
        prop_assert_eq!(c.log_p_multiple.unwrap(), a.log_p_multiple.unwrap() + b.log_p_multiple.unwrap());
        let v = Place::Archimedean;
        let (a, b, c) = (log_abs(&x, v).unwrap(), log_abs(&y, v).unwrap(), log_abs(&xy, v).unwrap());
        prop_assert!((c.value - a.value - b.value).abs() <= 1e-12 * (1.0 + c.value.abs()));
    }

    #[test]
    fn weil_height_is_sum_of_local_maxima(x in nonzero_rational()) {
        let s: f64 = support_places(&x).unwrap().into_iter().map(|v| log_abs(&x, v).unwrap().value.max(0.0)).sum();
        prop_assert!((s - weil_height(&x)).abs() <= 1e-12 * (1.0 + s));
    }

    #[test]
    fn resultant_routes_agree(d in 1usize..6, seed in any::<u64>()) {
        let mut rng = seed;
        let mut next = || { rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); ((rng >> 33) % 101) as i64 - 50 };
        let a = BinaryForm::from_i64(&(0..=d).map(|_| next()).collect::<Vec<_>>());
        let b = BinaryForm::from_i64(&(0..=d).map(|_| next()).collect::<Vec<_>>());
        prop_assert_eq!(resultant_bareiss(&a, &b, d).unwrap(), resultant_subresultant(&a, &b, d).unwrap());
    }

    #[test]
    fn resultant_swap_and_scale(a in form(3), b in form(3), c in -9i64..=9) {
        let d = 3;
        let r = resultant_forms(&a, &b, d).unwrap();
        let swapped = resultant_forms(&b, &a, d).unwrap();
        let sign = if (d * d) % 2 == 1 { -1 } else { 1 };
        prop_assert_eq!(swapped, &r * BigInt::from(sign));
        let scaled = resultant_forms(&a.scale(&BigInt::from(c)), &b, d).unwrap();
        prop_assert_eq!(scaled, &r * BigInt::from(c).pow(d as u32));
    }

    #[test]
    fn content_times_primitive_evaluates_equal(f in form(4), t1 in rational(), t2 in rational()) {
        prop_assume!(!f.is_zero());
        let (c, g) = f.content_and_primitive().unwrap();
        let lhs = &Rational::from(c) * &g.eval_exact(&t1, &t2);
        prop_assert_eq!(lhs, f.eval_exact(&t1, &t2));
    }

    #[test]
    fn gcd_divides_both(f in form(3), g in form(2), h in form(2)) {
        prop_assume!(!f.is_zero() && !g.is_zero() && !h.is_zero());
        let a = f.mul(&g);
        let b = f.mul(&h);
        let d = form_gcd(&a, &b).unwrap();
        prop_assert!(a.div_exact(&d).is_some());
        prop_assert!(b.div_exact(&d).is_some());
        prop_assert!(d.degree().unwrap() >= f.degree().unwrap());
    }

    #[test]
    fn lognorm_homogeneity(a in -1000i64..1000, b in 1i64..1000, k in -6i32..=6, p in prime()) {
        let seq = build_fn(&two(), CriticalSign::Plus, 3, Lift::Standard).unwrap();
        let pair = &seq.entry(3).unwrap().pair;
        let d = pair.degree() as f64;
        let x = FormPoint::rational(Rational::from(a), Rational::from(b));
        let alpha = Rational::from(p.get() as i64).pow(k).unwrap();
        let y = FormPoint::rational(&Rational::from(a) * &alpha, &Rational::from(b) * &alpha);
        let v = Place::Finite(p);
        let (lx, ly) = (pair.eval_lognorm(&x, v).unwrap(), pair.eval_lognorm(&y, v).unwrap());
        prop_assert_eq!(ly.log_p_multiple.unwrap(), lx.log_p_multiple.unwrap() - (d as i64) * k as i64);
        let s = 10f64.powi(k);
        let z = FormPoint::Complex(Complex64::new(a as f64, 0.3), Complex64::new(b as f64, -0.7));
        let zs = FormPoint::Complex(Complex64::new(a as f64 * s, 0.3 * s), Complex64::new(b as f64 * s, -0.7 * s));
        let (lz, lzs) = (pair.eval_lognorm(&z, Place::Archimedean).unwrap(), pair.eval_lognorm(&zs, Place::Archimedean).unwrap());
        prop_assert!((lzs.value - lz.value - d * s.ln()).abs() <= 1e-10 * (1.0 + lz.value.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn lifts_reproduce_orbits(t in small_rational(), plus in any::<bool>()) {
        let s = if plus { CriticalSign::Plus } else { CriticalSign::Minus };
        let seq = build_fn(&two(), s, 6, Lift::Standard).unwrap();
        let mut z = ProjPoint::Finite(Rational::from(s.value()));
        for n in 1..=6 {
            z = f_apply_point(&two(), &t, &z);
            let e = seq.entry(n).unwrap();
            let a = e.pair.a().eval_exact(&t, &Rational::one());
            let b = e.pair.b().eval_exact(&t, &Rational::one());
            prop_assume!(!(a.is_zero() && b.is_zero()));
            let (x1, x2) = z.lift();
            prop_assert_eq!(&a * &Rational::from(x2), &b * &Rational::from(x1));
        }
    }

    #[test]
    fn degree_law(p in -9i64..=9, q in 1i64..=9) {
        let Ok(lambda) = Lambda::new(Rational::new(p, q).unwrap()) else { return Ok(()) };
        for s in CriticalSign::BOTH {
            let seq = build_fn(&lambda, s, 6, Lift::Standard).unwrap();
            prop_assert_eq!(seq.degree(1).unwrap(), 1);
            for n in 2..=6 {
                prop_assert_eq!(seq.degree(n).unwrap(), 2 * seq.degree(n - 1).unwrap());
            }
        }
    }

    #[test]
    fn gamma_nonpositive_for_integral_multipliers(l in 2i64..60, neg in any::<bool>(), p in prime()) {
        let lambda = Lambda::from_i64(if neg { -l } else { l }).unwrap();
        let g = gamma_series(&lambda, Place::Finite(p), 1e-9).unwrap();
        prop_assert!(g.log_p.as_ref().unwrap().coeff <= Rational::zero());
    }

    #[test]
    fn green_is_symmetric_and_lift_independent(
        a in -50i64..50, b in 1i64..50, c in -50i64..50, d in 1i64..50, k in 1i64..5, p in prime(),
    ) {
        let fam = family();
        let x = FormPoint::rational(Rational::from(a), Rational::from(b));
        let y = FormPoint::rational(Rational::from(c), Rational::from(d));
        let ky = FormPoint::rational(Rational::from(c * k), Rational::from(d * k));
        for v in [Place::Finite(p), Place::Archimedean] {
            let pot = NormalizedPotential::new(fam, CriticalSign::Plus, v).unwrap();
            let gxy = green(&pot, &x, &y).unwrap();
            let gyx = green(&pot, &y, &x).unwrap();
            let gxky = green(&pot, &x, &ky).unwrap();
            let tol = if v.is_archimedean() { 1e-9 } else { 0.0 };
            if gxy.value.is_infinite() {
                prop_assert!(gyx.value.is_infinite() && gxky.value.is_infinite());
                continue;
            }
            prop_assert!((gxy.value - gyx.value).abs() <= tol * (1.0 + gxy.value.abs()));
            prop_assert!((gxy.value - gxky.value).abs() <= tol * (1.0 + gxy.value.abs()));
        }
    }
}

fn family() -> &'static Family {
    static F: std::sync::OnceLock<Family> = std::sync::OnceLock::new();
    F.get_or_init(|| Family::new(&two(), Lift::Standard, 6, EscapeMode::LogPlain).unwrap())
}

#[test]
fn rational_roots_are_preperiodic() {
    use heightlab_core::per1::{critical_orbit, periodic_parameter_poly, OrbitOptions, OrbitStatus};
    for s in CriticalSign::BOTH {
        let seq = build_fn(&two(), s, 4, Lift::Standard).unwrap();
        for n in 1..=4 {
            let poly = periodic_parameter_poly(&seq, n).unwrap();
            let lead = poly.lc();
            let c0 = poly.coeffs().iter().find(|c| !num_traits::Zero::is_zero(*c)).unwrap().clone();
            for num in divisors(&c0).into_iter().chain([BigInt::from(0)]) {
                for den in divisors(&lead) {
                    for sgn in [1, -1] {
                        let r = Rational::new(&num * sgn, den.clone()).unwrap();
                        if !poly.eval_rational(&r).is_zero() {
                            continue;
                        }
                        let o = critical_orbit(&two(), &r, s, 2 * n + 2, &OrbitOptions::default());
                        let OrbitStatus::Preperiodic { period, .. } = o.status else {
                            panic!("root {r} of P_{n}^{s} is not preperiodic: {:?}", o.status);
                        };
                        assert_eq!(n % period, 0, "root {r}, level {n}, period {period}");
                    }
                }
            }
        }
    }
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let m: u64 = n.magnitude().try_into().unwrap_or(0);
    if m == 0 || m > 1_000_000 {
        // Large constants: only the trivial divisors are tried.
        return vec![BigInt::from(1)];
    }
    (1..=m).filter(|d| m % d == 0).map(BigInt::from).collect()
}

#[test]
fn gamma_matches_escape_at_small_places() {
    let fam = Family::new(&two(), Lift::Standard, 8, EscapeMode::LogPlain).unwrap();
    let pt = FormPoint::rational(Rational::one(), Rational::zero());
    for s in CriticalSign::BOTH {
        for v in Place::up_to(50) {
            let e = fam.escape_rate(s, v, &pt).unwrap();
            let g = gamma_series(&two(), v, 1e-12).unwrap();
            assert!((e.value - g.value).abs() <= e.error + g.error, "{s} {v}: {e:?} vs {g:?}");
        }
    }
}

#[test]
fn every_radii_report_sandwiches() {
    let fam = family();
    for s in CriticalSign::BOTH {
        for v in Place::up_to(13) {
            for grid in [64, 128] {
                let r = fam.radii(s, v, grid).unwrap();
                assert!(r.sandwich_holds(), "{r:?}");
            }
        }
    }
}

#[test]
fn pcf_parameters_have_zero_height() {
    let grid: Vec<Rational> = heightlab_core::heights::rationals_by_height(6);
    for (t, status) in pcf_scan(&two(), &grid, 40) {
        if status == PcfStatus::Pcf {
            for s in CriticalSign::BOTH {
                let h = callsilverman_direct(&two(), &t, s, 8).unwrap();
                assert_eq!((h.value, h.error), (0.0, 0.0), "t = {t}");
            }
        }
    }
}
