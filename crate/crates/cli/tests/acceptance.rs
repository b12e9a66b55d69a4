//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use heightlab_core::equilab::{build_sn, energy_trend};
use heightlab_core::heights::{callsilverman_direct, callsilverman_local, combined_height, quasi_adelic_height};
use heightlab_core::per1::{critical_orbit, CriticalSign, Lambda, Lift, OrbitOptions, OrbitStatus, ParameterSet, RootOptions};
use heightlab_core::polyforms::FormPoint;
use heightlab_core::potentials::{gamma_series, EscapeMode, Family, MeasureSpec, PotentialValue, Provenance};
use heightlab_core::qfield::{product_formula_residual, weil_height, Place, Rational};

/// Depth of the lifts used throughout.
const N_MAX: usize = 8;
/// Truncation prime bound of quasi-adelic heights.
const P_BOUND: u64 = 100;
/// Depth of `callsilverman_direct`.
const DIRECT_DEPTH: usize = 16;
/// Direct vs local Call–Silverman agreement.
const DUAL_ORACLE_TOL: f64 = 1e-3;
/// Root residuals of `S_2^+`.
const ROOT_RESIDUAL_TOL: f64 = 1e-10;
/// `L` must exceed this many jackknife errors.
const L_MARGIN: f64 = 3.0;
/// Archimedean radii grid.
const RADII_GRID: usize = 64;
/// Proxy level for `L`.
const L_LEVEL: usize = 7;
const L_BLOCKS: usize = 8;

type Outcome = Result<String, String>;

fn two() -> Lambda {
    Lambda::from_i64(2).unwrap()
}

fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

fn family() -> Family {
    Family::new(&two(), Lift::Standard, N_MAX, EscapeMode::LogPlain).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_product_formula() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut count = 0;
    while count < 1000 {
        let a: i64 = rng.gen_range(-1_000_000_000..=1_000_000_000);
        let b: i64 = rng.gen_range(1..=1_000_000_000);
        if a == 0 {
            continue;
        }
        let x = Rational::new(a, b).unwrap();
        let r = product_formula_residual(&x).map_err(|e| e.to_string())?;
        ensure(r.is_zero(), || format!("nonzero residual at {x}: {:?}", r.residual))?;
        count += 1;
    }
    Ok("1000 rationals, residual exactly zero".into())
}

fn c2_pcf_example() -> Outcome {
    for s in CriticalSign::BOTH {
        let o = critical_orbit(&two(), &q("0"), s, 8, &OrbitOptions::default());
        ensure(o.status == OrbitStatus::Preperiodic { tail: 0, period: 1 }, || format!("orbit of {s}: {:?}", o.status))?;
        let h = callsilverman_direct(&two(), &q("0"), s, 8).map_err(|e| e.to_string())?;
        ensure(h.value == 0.0 && h.error == 0.0 && h.tag == Provenance::Exact, || format!("height {s}: {h:?}"))?;
    }
    Ok("both critical points fixed, heights exactly 0".into())
}

fn c3_parameter_set() -> Outcome {
    let fam = Family::new(&two(), Lift::Standard, 2, EscapeMode::LogPlain).unwrap();
    let set = build_sn(&fam, CriticalSign::Plus, 2, &RootOptions::default()).map_err(|e| e.to_string())?;
    let expected = [Complex64::new(-4.0 / 3.0, 0.0), Complex64::new(0.0, 0.0)];
    ensure(set.len() == 2, || format!("|S_2| = {}", set.len()))?;
    for (r, e) in set.roots.iter().zip(expected) {
        ensure((r.z - e).norm() <= ROOT_RESIDUAL_TOL && r.residual <= ROOT_RESIDUAL_TOL, || format!("root {r:?}"))?;
    }
    let o = critical_orbit(&two(), &q("-4/3"), CriticalSign::Plus, 8, &OrbitOptions::default());
    ensure(o.status == OrbitStatus::Preperiodic { tail: 0, period: 2 }, || format!("orbit {:?}", o.status))?;
    Ok(format!("S_2^+ = {{-4/3, 0}}, max residual {:.1e}, period 2", set.roots.iter().map(|r| r.residual).fold(0.0, f64::max)))
}

fn c4_gamma() -> Outcome {
    let g2 = gamma_series(&two(), Place::finite(2).unwrap(), 1e-12).map_err(|e| e.to_string())?;
    let exact_zero = g2.value == 0.0 && g2.error == 0.0 && g2.log_p.as_ref().is_some_and(|l| l.coeff.is_zero());
    ensure(exact_zero, || format!("gamma_2 = {g2:?}"))?;
    let mut negative = 0;
    for v in Place::up_to(97).into_iter().skip(2) {
        let g = gamma_series(&two(), v, 1e-12).map_err(|e| e.to_string())?;
        let coeff = g.log_p.as_ref().map(|l| l.coeff.clone()).ok_or("missing log_p coefficient")?;
        ensure(coeff < Rational::zero(), || format!("gamma at {v} = {coeff}"))?;
        negative += 1;
    }
    ensure(negative >= 24, || format!("only {negative} places"))?;
    Ok(format!("gamma_2 = 0 exactly; {negative} odd primes with gamma_p < 0"))
}

fn c5_series_vs_escape(fam: &Family) -> Outcome {
    let inf_pt = FormPoint::rational(Rational::one(), Rational::zero());
    let zero_pt = FormPoint::rational(Rational::zero(), Rational::one());
    let mut worst: f64 = 0.0;
    for v in [Place::Archimedean, Place::finite(3).unwrap(), Place::finite(5).unwrap(), Place::finite(7).unwrap(), Place::finite(11).unwrap()] {
        let e = fam.escape_rate(CriticalSign::Plus, v, &inf_pt).map_err(|e| e.to_string())?;
        let g = gamma_series(&two(), v, 1e-12).map_err(|e| e.to_string())?;
        let d = (e.value - g.value).abs();
        ensure(d <= e.error + g.error, || format!("{v}: escape {e:?} vs gamma {g:?}"))?;
        worst = worst.max(d / (e.error + g.error));
    }
    for p in [3, 5, 7] {
        let e = fam.escape_rate(CriticalSign::Plus, Place::finite(p).unwrap(), &zero_pt).map_err(|e| e.to_string())?;
        ensure(e.contains(0.0, 0.0), || format!("G_{p}(0,1) = {e:?}"))?;
    }
    Ok(format!("largest |G - gamma| / error = {worst:.3}; G_p(0,1) = 0 at 3, 5, 7"))
}

fn c6_height_identity(fam: &Family) -> Outcome {
    let mut worst: f64 = 0.0;
    for t in ["0", "1", "1/2", "-2", "-4/3"] {
        for s in CriticalSign::BOTH {
            let qa = quasi_adelic_height(fam, &q(t), s, P_BOUND).map_err(|e| e.to_string())?;
            let cs = callsilverman_direct(&two(), &q(t), s, DIRECT_DEPTH).map_err(|e| e.to_string())?;
            let d = (qa.total.value - 2.0 * cs.value).abs();
            let budget = qa.total.error + 2.0 * cs.error;
            ensure(d <= budget, || format!("t={t} s={s}: {} vs 2*{}, budget {budget}", qa.total.value, cs.value))?;
            worst = worst.max(d / budget.max(f64::MIN_POSITIVE));
        }
    }
    Ok(format!("10 cases, largest discrepancy / error = {worst:.3}"))
}

fn c7_dual_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut seen = Vec::new();
    while seen.len() < 20 {
        let a: i64 = rng.gen_range(-20..=20);
        let b: i64 = rng.gen_range(1..=20);
        let t = Rational::new(a, b).unwrap();
        if seen.contains(&t) || weil_height(&t) > 20f64.ln() + 1e-12 {
            continue;
        }
        seen.push(t.clone());
        let s = if rng.gen::<bool>() { CriticalSign::Plus } else { CriticalSign::Minus };
        let d = callsilverman_direct(&two(), &t, s, DIRECT_DEPTH).map_err(|e| e.to_string())?;
        let l = callsilverman_local(&two(), &t, s).map_err(|e| e.to_string())?;
        let diff = (d.value - l.total.value).abs();
        ensure(diff <= DUAL_ORACLE_TOL, || format!("t={t} s={s}: direct {d:?} local {:?}", l.total))?;
        worst = worst.max(diff);
    }
    Ok(format!("20 parameters, largest difference {worst:.2e}"))
}

fn c8_capacity_radii(fam: &Family) -> Outcome {
    let r1 = fam.sequence(CriticalSign::Plus).resultant(1).map_err(|e| e.to_string())?.clone();
    let r2 = fam.sequence(CriticalSign::Plus).resultant(2).map_err(|e| e.to_string())?.clone();
    ensure(r1.magnitude() == &2u32.into() && r2.magnitude() == &192u32.into(), || format!("Res(F_1) = {r1}, Res(F_2) = {r2}"))?;
    let mut rows = Vec::new();
    for s in CriticalSign::BOTH {
        for v in [Place::Archimedean, Place::finite(3).unwrap(), Place::finite(5).unwrap()] {
            let r = fam.radii(s, v, RADII_GRID).map_err(|e| e.to_string())?;
            ensure(r.sandwich_holds(), || format!("{s} {v}: {r:?}"))?;
            let (ni, no) = r.normalized();
            rows.push(format!("{s}{v}:[{ni:.3},{no:.3}]"));
        }
    }
    Ok(format!("|Res F_1| = 2, |Res F_2| = 192; normalised radii {}", rows.join(" ")))
}

fn c9_energy_trend(fam: &Family) -> Outcome {
    let t = energy_trend(fam, CriticalSign::Plus, &[3, 5, 7], &RootOptions::default()).map_err(|e| e.to_string())?;
    let e: Vec<f64> = t.energies.iter().map(|v| v.value).collect();
    let values = format!("E3 = {:.6}, E5 = {:.6}, E7 = {:.6}", e[0], e[1], e[2]);
    let magnitudes = t.magnitude_below(7, 5) == Some(true) && t.magnitude_below(5, 3) == Some(true);
    println!("    note: |E7| < |E5| < |E3| is {magnitudes} ({values})");
    ensure(e[2] < e[1] && e[1] < e[0], || format!("signed ordering E7 < E5 < E3 fails: {values}"))?;
    Ok(values)
}

fn c10_l_positive(fam: &Family) -> Outcome {
    let opts = RootOptions::default();
    let sp = ParameterSet::periodic(fam.sequence(CriticalSign::Plus), L_LEVEL, &opts).map_err(|e| e.to_string())?;
    let sm = ParameterSet::periodic(fam.sequence(CriticalSign::Minus), L_LEVEL, &opts).map_err(|e| e.to_string())?;
    let l = fam.l_estimate(&MeasureSpec::average(), &[&sp, &sm], L_BLOCKS).map_err(|e| e.to_string())?;
    let est: &PotentialValue = &l.estimate;
    ensure(est.value > L_MARGIN * est.error, || format!("L = {est:?}"))?;
    let h = combined_height(fam, &q("0"), &MeasureSpec::average(), P_BOUND, est).map_err(|e| e.to_string())?;
    ensure(h.value + h.error < 0.0, || format!("combined height at 0 = {h:?}"))?;
    Ok(format!("L = {:.4} +- {:.4}; h_mu(0) = {:.4} +- {:.4}", est.value, est.error, h.value, h.error))
}

fn c11_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |tag: &str| -> Result<(Vec<u8>, Vec<u8>), String> {
        let csv = dir.path().join(format!("{tag}.csv"));
        let json = dir.path().join(format!("{tag}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_heightlab"))
            .args(["equidist", "--lambda", "2", "--n", "6", "--seed", "7"])
            .arg("--csv")
            .arg(&csv)
            .arg("--out")
            .arg(&json)
            .env("HEIGHTLAB_CACHE", dir.path().join("cache"))
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), || format!("exit status {status}"))?;
        let read = |p: &std::path::Path| std::fs::read(p).map_err(|e| e.to_string());
        Ok((read(&csv)?, read(&json)?))
    };
    let a = run("first")?;
    let b = run("second")?;
    ensure(a == b, || "outputs differ between runs".into())?;
    Ok(format!("CSV {} bytes and JSON {} bytes identical", a.0.len(), a.1.len()))
}

fn main() {
    let fam = family();
    let criteria: Vec<(&str, Duration, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("1 product formula", Duration::from_secs(1), Box::new(c1_product_formula)),
        ("2 PCF example", Duration::from_secs(1), Box::new(c2_pcf_example)),
        ("3 hand-verified parameter set", Duration::from_secs(1), Box::new(c3_parameter_set)),
        ("4 gamma diagnostics", Duration::from_secs(10), Box::new(c4_gamma)),
        ("5 series vs escape rate", Duration::from_secs(120), Box::new(|| c5_series_vs_escape(&fam))),
        ("6 height identity", Duration::from_secs(300), Box::new(|| c6_height_identity(&fam))),
        ("7 dual height oracles", Duration::from_secs(120), Box::new(c7_dual_oracles)),
        ("8 capacity/radii sandwich", Duration::from_secs(120), Box::new(|| c8_capacity_radii(&fam))),
        ("9 equidistribution trend", Duration::from_secs(300), Box::new(|| c9_energy_trend(&fam))),
        ("10 L positivity and negative height", Duration::from_secs(300), Box::new(|| c10_l_positive(&fam))),
        ("11 determinism", Duration::from_secs(300), Box::new(c11_determinism)),
    ];
    let mut failed = Vec::new();
    for (name, limit, check) in &criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if elapsed > *limit => Err(format!("{msg}; took {elapsed:.2?}, limit {limit:?}")),
            o => o,
        };
        match outcome {
            Ok(msg) => println!("criterion {name}: PASS ({elapsed:.2?}) {msg}"),
            Err(msg) => {
                println!("criterion {name}: FAIL ({elapsed:.2?}) {msg}");
                failed.push(*name);
            }
        }
    }
    if !failed.is_empty() {
        println!("{} of {} criteria failed: {}", failed.len(), criteria.len(), failed.join(", "));
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
