//! Subcommand implementations; each returns its JSON report.

use num_complex::Complex64;
use serde_json::{json, Value};

use heightlab_core::equilab::{annulus_histogram, conjugation_closed, energy_trend, pointcloud_export};
use heightlab_core::heights::{
    callsilverman_direct, callsilverman_local, combined_height, finiteness_scan, pcf_scan, quasi_adelic_height,
    rationals_by_height,
};
use heightlab_core::per1::{CriticalSign, FnSequence, ParameterSet, RootOptions};
use heightlab_core::potentials::{gamma_series, Family, LEstimate, MeasureSpec};
use heightlab_core::qfield::{Place, Rational};

use crate::cache::{load_sequence, FnCache};
use crate::config::{Config, MAX_N};
use crate::{CliError, Command};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_sign(s: &str) -> Result<CriticalSign, CliError> {
    s.parse().map_err(|_| usage(format!("sign must be + or -, got {s:?}")))
}

fn parse_signs(s: &Option<String>) -> Result<Vec<CriticalSign>, CliError> {
    match s {
        Some(s) => Ok(vec![parse_sign(s)?]),
        None => Ok(CriticalSign::BOTH.to_vec()),
    }
}

fn parse_rational(s: &str) -> Result<Rational, CliError> {
    s.trim().parse().map_err(|_| usage(format!("not a rational number: {s:?}")))
}

fn parse_place(s: &str) -> Result<Place, CliError> {
    s.trim().parse().map_err(|_| usage(format!("not a place: {s:?}")))
}

fn parse_list<T>(s: &str, f: impl Fn(&str) -> Result<T, CliError>) -> Result<Vec<T>, CliError> {
    s.split(',').filter(|w| !w.trim().is_empty()).map(|w| f(w.trim())).collect()
}

fn open_cache(cfg: &Config) -> Option<FnCache> {
    let dir = cfg.cache_dir.as_ref()?;
    match FnCache::new(dir) {
        Ok(c) => Some(c),
        Err(e) => {
            log::warn!("cache disabled, cannot use {}: {e}", dir.display());
            None
        }
    }
}

fn sequence(cfg: &Config, s: CriticalSign, n: usize) -> Result<FnSequence, CliError> {
    Ok(load_sequence(open_cache(cfg).as_ref(), &cfg.lambda, s, cfg.lift, n)?)
}

fn family(cfg: &Config) -> Result<Family, CliError> {
    let plus = sequence(cfg, CriticalSign::Plus, cfg.n_max)?;
    let minus = sequence(cfg, CriticalSign::Minus, cfg.n_max)?;
    Ok(Family::from_sequences(plus, minus, cfg.escape))
}

fn root_options(cfg: &Config) -> RootOptions {
    RootOptions { eps: cfg.root_eps(), seed: cfg.seed, ..RootOptions::default() }
}

fn check_level(n: usize, cfg: &Config) -> Result<(), CliError> {
    if n == 0 || n > cfg.n_max {
        return Err(usage(format!("level {n} outside 1..=n_max ({})", cfg.n_max)));
    }
    Ok(())
}

/// `L` from the level-`level` parameter sets of both signs.
fn l_estimate(family: &Family, cfg: &Config, level: usize, blocks: usize) -> Result<LEstimate, CliError> {
    check_level(level, cfg)?;
    let opts = root_options(cfg);
    let sp = ParameterSet::periodic(family.sequence(CriticalSign::Plus), level, &opts)?;
    let sm = ParameterSet::periodic(family.sequence(CriticalSign::Minus), level, &opts)?;
    Ok(family.l_estimate(&MeasureSpec::average(), &[&sp, &sm], blocks)?)
}

pub(crate) fn dispatch(cmd: &Command, cfg: &Config) -> Result<Value, CliError> {
    match cmd {
        Command::Gamma => gamma(cfg),
        Command::Fn { sign, n } => fn_entry(cfg, parse_sign(sign)?, n.unwrap_or(cfg.n_max)),
        Command::Capacity { sign, place } => capacity(cfg, &parse_signs(sign)?, place.as_deref()),
        Command::Radii { sign, place } => radii(cfg, &parse_signs(sign)?, parse_place(place)?),
        Command::Height { t, sign, method, depth, level } => {
            height(cfg, &parse_rational(t)?, parse_sign(sign)?, method, *depth, *level)
        }
        Command::PcfScan { t, bound, budget } => {
            let grid = match t {
                Some(list) => parse_list(list, parse_rational)?,
                None => rationals_by_height(*bound),
            };
            let rows: Vec<Value> = pcf_scan(&cfg.lambda, &grid, *budget)
                .into_iter()
                .map(|(t, s)| json!({ "t": t, "status": s }))
                .collect();
            Ok(json!({ "lambda": cfg.lambda, "budget": budget, "results": rows }))
        }
        Command::Equidist { n, sign, csv, bins } => {
            equidist(cfg, *n, parse_sign(sign)?, csv.as_deref(), &parse_list(bins, parse_f64)?)
        }
        Command::Energy { sign, levels } => {
            let levels = parse_list(levels, |w| w.parse::<usize>().map_err(|_| usage(format!("bad level {w:?}"))))?;
            if let Some(&m) = levels.iter().max() {
                check_level(m, cfg)?;
            }
            let fam = family(cfg)?;
            let trend = energy_trend(&fam, parse_sign(sign)?, &levels, &root_options(cfg))?;
            Ok(json!({
                "lambda": cfg.lambda,
                "trend": trend,
                "lower_bound": trend.lower_bounds,
            }))
        }
        Command::Lcheck { level, blocks, t, delta, bound } => {
            lcheck(cfg, *level, *blocks, &parse_rational(t)?, *delta, *bound)
        }
    }
}

fn parse_f64(w: &str) -> Result<f64, CliError> {
    w.parse().map_err(|_| usage(format!("not a number: {w:?}")))
}

fn gamma(cfg: &Config) -> Result<Value, CliError> {
    let mut rows = Vec::new();
    for v in Place::up_to(cfg.p_bound) {
        let g = gamma_series(&cfg.lambda, v, cfg.tol)?;
        if g.error > cfg.tol + 1e-12 * (1.0 + g.value.abs()) {
            return Err(CliError::NonConvergence(format!("gamma at {v}: error {} above tol", g.error)));
        }
        rows.push(json!({ "place": v, "value": g.value, "error": g.error, "tag": g.tag }));
    }
    Ok(json!({ "lambda": cfg.lambda, "P": cfg.p_bound, "tol": cfg.tol, "places": rows }))
}

fn fn_entry(cfg: &Config, s: CriticalSign, n: usize) -> Result<Value, CliError> {
    if !(1..=MAX_N).contains(&n) {
        return Err(usage(format!("n must lie in 1..={MAX_N}")));
    }
    let seq = sequence(cfg, s, n)?;
    let e = seq.entry(n)?;
    let coeffs = |f: &heightlab_core::BinaryForm| f.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>();
    Ok(json!({
        "lambda": cfg.lambda,
        "sign": s,
        "lift": cfg.lift.to_string(),
        "n": n,
        "degree": e.degree(),
        "F": e.pair.to_string(),
        "A": coeffs(e.pair.a()),
        "B": coeffs(e.pair.b()),
        "content": e.content.to_string(),
        "removed_gcd": e.removed_gcd.to_string(),
    }))
}

fn capacity(cfg: &Config, signs: &[CriticalSign], places: Option<&str>) -> Result<Value, CliError> {
    let places = match places {
        Some(list) => parse_list(list, parse_place)?,
        None => Place::up_to(cfg.p_bound),
    };
    let fam = family(cfg)?;
    let mut rows = Vec::new();
    for &s in signs {
        for &v in &places {
            rows.push(to_value(&fam.capacity(s, v)?));
        }
    }
    Ok(json!({ "lambda": cfg.lambda, "n_max": cfg.n_max, "estimates": rows }))
}

fn radii(cfg: &Config, signs: &[CriticalSign], v: Place) -> Result<Value, CliError> {
    let fam = family(cfg)?;
    let mut rows = Vec::new();
    for &s in signs {
        let r = fam.radii(s, v, cfg.grid)?;
        let (ni, no) = r.normalized();
        rows.push(json!({
            "report": r,
            "normalized_r_in": ni,
            "normalized_r_out": no,
            "sandwich_holds": r.sandwich_holds(),
        }));
    }
    Ok(json!({ "lambda": cfg.lambda, "n_max": cfg.n_max, "grid": cfg.grid, "radii": rows }))
}

fn height(cfg: &Config, t: &Rational, s: CriticalSign, method: &str, depth: usize, level: usize) -> Result<Value, CliError> {
    match method {
        "quasi-adelic" => {
            let fam = family(cfg)?;
            Ok(to_value(&quasi_adelic_height(&fam, t, s, cfg.p_bound)?))
        }
        "callsilverman-local" => Ok(to_value(&callsilverman_local(&cfg.lambda, t, s)?)),
        "callsilverman-direct" => {
            let h = callsilverman_direct(&cfg.lambda, t, s, depth)?;
            Ok(json!({
                "t": t, "sign": s, "method": method, "depth": depth,
                "total": h.value, "total_error": h.error, "tag": h.tag,
            }))
        }
        "combined" => {
            let fam = family(cfg)?;
            let l = l_estimate(&fam, cfg, level, 8)?;
            let h = combined_height(&fam, t, &MeasureSpec::average(), cfg.p_bound, &l.estimate)?;
            Ok(json!({
                "t": t, "method": method, "P": cfg.p_bound, "L": l,
                "total": h.value, "total_error": h.error, "tag": h.tag,
            }))
        }
        other => Err(usage(format!(
            "unknown method {other:?} (quasi-adelic, callsilverman-local, callsilverman-direct, combined)"
        ))),
    }
}

fn equidist(
    cfg: &Config,
    n: usize,
    s: CriticalSign,
    csv: Option<&std::path::Path>,
    bins: &[f64],
) -> Result<Value, CliError> {
    check_level(n, cfg)?;
    let seq = sequence(cfg, s, n)?;
    let set = ParameterSet::periodic(&seq, n, &root_options(cfg))?;
    if let Some(path) = csv {
        pointcloud_export(&set, path)?;
    }
    let hist = annulus_histogram(&set, Complex64::new(0.0, 0.0), bins)?;
    let max_residual = set.roots.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(json!({
        "lambda": cfg.lambda,
        "sign": s,
        "n": n,
        "seed": cfg.seed,
        "size": set.len(),
        "degree": set.poly.degree(),
        "max_residual": max_residual,
        "conjugation_closed": conjugation_closed(&set, 1e3 * cfg.root_eps()),
        "histogram": hist,
    }))
}

fn lcheck(cfg: &Config, level: usize, blocks: usize, t: &Rational, delta: Option<f64>, bound: u64) -> Result<Value, CliError> {
    let fam = family(cfg)?;
    let l = l_estimate(&fam, cfg, level, blocks)?;
    let spec = MeasureSpec::average();
    let h = combined_height(&fam, t, &spec, cfg.p_bound, &l.estimate)?;
    let margin = l.estimate.value > 3.0 * l.estimate.error;
    let mut report = json!({
        "lambda": cfg.lambda,
        "P": cfg.p_bound,
        "L": l,
        "L_positive_with_margin": margin,
        "t": t,
        "combined_height": h,
        "combined_height_negative": h.value + h.error < 0.0,
    });
    if let Some(d) = delta {
        let hits = finiteness_scan(&fam, &spec, d, bound, cfg.p_bound, &l.estimate)?;
        report["finiteness"] = json!({ "delta": d, "bound": bound, "hits": hits });
    }
    Ok(report)
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}
