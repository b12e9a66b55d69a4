//! Simultaneous (Aberth–Ehrlich) complex root finding with residual checks.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::fnseq::{FnSequence, NewtonData};
use super::{periodic_parameter_poly, CriticalSign, Lambda, Per1Error};
use crate::numeric::{max_bits, scaled_f64};
use crate::polyforms::UniPoly;

/// A polynomial the solver can evaluate.
pub trait RootTarget: Sync {
    fn degree(&self) -> usize;
    /// `log |P(z)|` and the Newton step `P(z) / P'(z)`.
    fn newton(&self, z: Complex64) -> Option<NewtonData>;
    /// `log ||P||` (max-abs coefficient norm) of the defining polynomial.
    fn log_norm(&self) -> f64;
    /// An upper bound for the moduli of the roots.
    fn root_bound(&self) -> f64;
}

/// Horner evaluation of an integer polynomial, reversed outside the unit disc.
#[derive(Clone, Debug)]
pub struct PolyTarget {
    coeffs: Vec<f64>,
    shift: u64,
    poly: UniPoly,
}

impl PolyTarget {
    pub fn new(poly: &UniPoly) -> Self {
        let shift = max_bits(poly.coeffs()).saturating_sub(60);
        let coeffs = poly.coeffs().iter().map(|c| scaled_f64(c, shift)).collect();
        PolyTarget { coeffs, shift, poly: poly.clone() }
    }
}

/// Fujiwara bound `2 max_k |c_{d-k} / c_d|^(1/k)`, computed in logs.
fn fujiwara(poly: &UniPoly) -> f64 {
    let d = poly.degree().unwrap_or(0);
    if d == 0 {
        return 1.0;
    }
    let lc = crate::numeric::log_abs_bigint(&poly.lc());
    let c = poly.coeffs();
    let mut best = f64::NEG_INFINITY;
    for k in 1..=d {
        let l = crate::numeric::log_abs_bigint(&c[d - k]);
        if l.is_finite() {
            let mut v = (l - lc) / k as f64;
            if k == d {
                v -= std::f64::consts::LN_2 / k as f64;
            }
            best = best.max(v);
        }
    }
    2.0 * best.exp()
}

fn horner(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut dv = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dv = dv * z + v;
        v = v * z + a;
    }
    (v, dv)
}

impl RootTarget for PolyTarget {
    fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn newton(&self, z: Complex64) -> Option<NewtonData> {
        let d = self.degree() as f64;
        let base = self.shift as f64 * std::f64::consts::LN_2;
        if z.norm() <= 1.0 {
            let (v, dv) = horner(&self.coeffs, z);
            return Some(NewtonData { log_abs: v.norm().ln() + base, ratio: v / dv });
        }
        // P(z) = z^d Q(w), w = 1/z, Q with reversed coefficients.
        let w = z.inv();
        let rev: Vec<f64> = self.coeffs.iter().rev().copied().collect();
        let (q, dq) = horner(&rev, w);
        let den = d * q - w * dq;
        Some(NewtonData { log_abs: d * z.norm().ln() + q.norm().ln() + base, ratio: z * q / den })
    }

    fn log_norm(&self) -> f64 {
        self.poly.log_max_coeff()
    }

    fn root_bound(&self) -> f64 {
        fujiwara(&self.poly)
    }
}

/// `P_n` evaluated through the critical-orbit recursion, avoiding the
/// cancellation of Horner on its huge coefficients.
struct DynamicalTarget<'a> {
    seq: &'a FnSequence,
    n: usize,
    poly: UniPoly,
    /// `log` of the factor `A_n - s B_n = kappa P_n`.
    log_kappa: f64,
}

impl RootTarget for DynamicalTarget<'_> {
    fn degree(&self) -> usize {
        self.poly.degree().unwrap_or(0)
    }

    fn newton(&self, z: Complex64) -> Option<NewtonData> {
        let nd = self.seq.newton_data(self.n, z)?;
        Some(NewtonData { log_abs: nd.log_abs - self.log_kappa, ratio: nd.ratio })
    }

    fn log_norm(&self) -> f64 {
        self.poly.log_max_coeff()
    }

    fn root_bound(&self) -> f64 {
        fujiwara(&self.poly)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootOptions {
    /// `eps_root` in `|P(z)| <= eps ||P|| max(1, |z|)^deg P`.
    pub eps: f64,
    pub max_iter: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions { eps: 1e-12, max_iter: 600, max_restarts: 4, seed: 0x5eed }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub z: Complex64,
    /// `|P(z)| / (||P|| max(1, |z|)^deg P)`.
    pub residual: f64,
}

/// The roots of one integer polynomial, with certified residuals.
#[derive(Clone, Debug)]
pub struct ParameterSet {
    pub lambda: Option<Lambda>,
    pub sign: Option<CriticalSign>,
    pub level: usize,
    pub poly: UniPoly,
    pub eps_root: f64,
    /// Sorted by `(re, im)`.
    pub roots: Vec<Root>,
}

impl ParameterSet {
    /// Roots of `P_n` for a critical-orbit sequence.
    pub fn periodic(seq: &FnSequence, n: usize, opts: &RootOptions) -> Result<Self, Per1Error> {
        let poly = periodic_parameter_poly(seq, n)?;
        let e = seq.entry(n)?;
        let raw = &e.pair.a().dehomogenize() - &e.pair.b().dehomogenize().scale(&seq.sign().value().into());
        let log_kappa = raw.log_max_coeff() - poly.log_max_coeff();
        let uniform = seq.entries()[1..=n].iter().all(|e| e.removed_gcd.dehomogenize().degree() == Some(0));
        let roots = if uniform {
            let target = DynamicalTarget { seq, n, poly: poly.clone(), log_kappa };
            aberth(&target, opts)?
        } else {
            aberth(&PolyTarget::new(&poly), opts)?
        };
        Ok(ParameterSet {
            lambda: Some(seq.lambda().clone()),
            sign: Some(seq.sign()),
            level: n,
            poly,
            eps_root: opts.eps,
            roots,
        })
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn points(&self) -> Vec<Complex64> {
        self.roots.iter().map(|r| r.z).collect()
    }
}

/// All complex roots of an integer polynomial of degree at least 1.
pub fn complex_roots(poly: &UniPoly, opts: &RootOptions) -> Result<Vec<Root>, Per1Error> {
    aberth(&PolyTarget::new(poly), opts)
}

/// Relative Aberth correction below which an approximation is settled.
const STEP_TOL: f64 = 1e-13;

fn log_tolerance(target: &dyn RootTarget, eps: f64, z: Complex64) -> f64 {
    eps.ln() + target.log_norm() + target.degree() as f64 * z.norm().ln().max(0.0)
}

fn residual(target: &dyn RootTarget, nd: Option<NewtonData>, z: Complex64) -> f64 {
    match nd {
        Some(nd) => (nd.log_abs - log_tolerance(target, 1.0, z)).exp(),
        None => f64::INFINITY,
    }
}

fn aberth(target: &dyn RootTarget, opts: &RootOptions) -> Result<Vec<Root>, Per1Error> {
    let d = target.degree();
    if d == 0 {
        return Err(Per1Error::ConstantPolynomial);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let radius = target.root_bound().clamp(1e-3, 1e6) * 0.5;
    let mut best: Vec<Root> = Vec::new();
    for _restart in 0..=opts.max_restarts {
        let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let mut z: Vec<Complex64> = (0..d)
            .map(|k| Complex64::from_polar(radius, phase + std::f64::consts::TAU * (k as f64 + 0.25) / d as f64))
            .collect();
        let mut done = vec![false; d];
        for iter in 0..opts.max_iter {
            for i in 0..d {
                let Some(nd) = target.newton(z[i]) else {
                    z[i] += Complex64::new(rng.gen_range(-1e-3..1e-3), rng.gen_range(-1e-3..1e-3));
                    done[i] = false;
                    continue;
                };
                let small = nd.log_abs <= log_tolerance(target, opts.eps, z[i]);
                if !nd.ratio.is_finite() {
                    done[i] = small;
                    continue;
                }
                let s: Complex64 = (0..d).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
                let w = nd.ratio / (Complex64::new(1.0, 0.0) - nd.ratio * s);
                if w.is_finite() {
                    z[i] -= w;
                    let step = w.norm() / z[i].norm().max(1.0);
                    done[i] = small && step < STEP_TOL;
                } else {
                    done[i] = small;
                }
            }
            if done.iter().all(|&b| b) {
                break;
            }
            let stalled = (iter + 1) % 200 == 0;
            if stalled {
                for i in (0..d).filter(|&i| !done[i]) {
                    let r = 1e-4 * z[i].norm().max(1.0);
                    z[i] += Complex64::new(rng.gen_range(-r..r), rng.gen_range(-r..r));
                }
            }
        }
        let roots: Vec<Root> = z
            .iter()
            .map(|&zi| Root { z: zi, residual: residual(target, target.newton(zi), zi) })
            .collect();
        let ok = roots.iter().all(|r| r.residual <= opts.eps);
        if ok {
            let mut roots = roots;
            roots.sort_by(|a, b| a.z.re.total_cmp(&b.z.re).then(a.z.im.total_cmp(&b.z.im)));
            return Ok(roots);
        }
        let good = roots.iter().filter(|r| r.residual <= opts.eps).count();
        if good >= best.iter().filter(|r| r.residual <= opts.eps).count() {
            best = roots;
        }
    }
    let converged = best.iter().filter(|r| r.residual <= opts.eps).count();
    Err(Per1Error::NoConvergence { degree: d, converged, partial: best })
}
