//! The critical-orbit lifts `F_n = (A_n, B_n)` as forms in `(t1, t2)`.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{CriticalSign, Lambda, Lift, MapLift, Per1Error};
use crate::numeric::{log_abs_bigint, max_bits, scaled_f64};
use crate::polyforms::{form_gcd, BinaryForm, BinaryFormPair, UniPoly};

/// Upper limit on the total coefficient bits held by one sequence.
pub const MAX_TOTAL_BITS: u64 = 1 << 28;

/// One level of the sequence: `Phi(F_{n-1}) = content * removed_gcd * F_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FnEntry {
    pub n: usize,
    pub pair: BinaryFormPair,
    pub removed_gcd: BinaryForm,
    pub content: BigInt,
}

impl FnEntry {
    pub fn degree(&self) -> usize {
        self.pair.degree()
    }
}

/// `F_0 = (s, 1)` and its iterates under the homogeneous lift, with the
/// integer content and polynomial gcd removed at every level.
#[derive(Clone, Debug)]
pub struct FnSequence {
    lambda: Lambda,
    sign: CriticalSign,
    lift: Lift,
    entries: Vec<FnEntry>,
    resultants: Vec<OnceLock<BigInt>>,
}

/// `Phi` applied to forms: `(p t2 z1 z2, q (t2 z1^2 + t1 z1 z2 + t2 z2^2))`.
fn lift_forms(lambda: &Lambda, lift: Lift, z1: &BinaryForm, z2: &BinaryForm) -> (BinaryForm, BinaryForm) {
    let t1 = BinaryForm::t1();
    let t2 = BinaryForm::t2();
    let z12 = z1.mul(z2);
    let z11 = z1.mul(z1);
    let z22 = z2.mul(z2);
    let a = match lift {
        Lift::Standard => t2.mul(&z12),
        Lift::Literal => t2.mul(&z11),
    }
    .scale(lambda.p());
    let b = t2
        .mul(&z11)
        .add(&t1.mul(&z12))
        .and_then(|s| s.add(&t2.mul(&z22)))
        .expect("equal degrees")
        .scale(lambda.q());
    (a, b)
}

fn joint_content(a: &BinaryForm, b: &BinaryForm) -> BigInt {
    a.coeffs().iter().chain(b.coeffs()).fold(BigInt::zero(), |g, c| g.gcd(c))
}

fn divide(f: &BinaryForm, c: &BigInt) -> BinaryForm {
    BinaryForm::new(f.coeffs().iter().map(|x| x / c).collect())
}

fn start_entry(sign: CriticalSign) -> FnEntry {
    let pair = BinaryFormPair::new(BinaryForm::constant(sign.value()), BinaryForm::constant(1))
        .expect("(±1, 1) is a valid pair");
    FnEntry { n: 0, pair, removed_gcd: BinaryForm::constant(1), content: BigInt::one() }
}

/// Builds `F_0..F_{n_max}` for the given critical sign.
pub fn build_fn(lambda: &Lambda, sign: CriticalSign, n_max: usize, lift: Lift) -> Result<FnSequence, Per1Error> {
    if n_max < 1 {
        return Err(Per1Error::InvalidDepth);
    }
    let mut entries = vec![start_entry(sign)];
    let mut bits = 0u64;
    for n in 1..=n_max {
        let prev = &entries[n - 1].pair;
        let (a, b) = lift_forms(lambda, lift, prev.a(), prev.b());
        let g = form_gcd(&a, &b)?;
        let a = a.div_exact(&g).ok_or(Per1Error::Inconsistent(n))?;
        let b = b.div_exact(&g).ok_or(Per1Error::Inconsistent(n))?;
        let c = joint_content(&a, &b);
        let (a, b) = (divide(&a, &c), divide(&b, &c));
        bits += a.coeffs().iter().chain(b.coeffs()).map(|x| x.bits().max(1)).sum::<u64>();
        if bits > MAX_TOTAL_BITS {
            return Err(Per1Error::MemoryGuard(MAX_TOTAL_BITS));
        }
        let pair = BinaryFormPair::new_unchecked(a, b)?;
        entries.push(FnEntry { n, pair, removed_gcd: g, content: c });
    }
    Ok(FnSequence::assemble(lambda.clone(), sign, lift, entries))
}

/// `P_n(t)`: primitive part of `A_n(t, 1) - s B_n(t, 1)`, positive leading
/// coefficient. Its roots are the parameters where `f_t^n(s) = s`.
pub fn periodic_parameter_poly(seq: &FnSequence, n: usize) -> Result<UniPoly, Per1Error> {
    let e = seq.entry(n)?;
    let a = e.pair.a().dehomogenize();
    let b = e.pair.b().dehomogenize().scale(&BigInt::from(seq.sign().value()));
    let p = &a - &b;
    if p.is_zero() {
        return Err(Per1Error::ZeroPolynomial);
    }
    Ok(p.primitive_part())
}

/// `P(t)/P'(t)` and `log |A_n(t,1) - s B_n(t,1)|` from the scaled recursion.
#[derive(Clone, Copy, Debug)]
pub struct NewtonData {
    pub log_abs: f64,
    pub ratio: Complex64,
}

/// Complex Horner for a univariate integer polynomial with coefficients
/// scaled by `2^-shift`: returns `(value, derivative, shift)`.
fn horner_with_derivative(u: &UniPoly, t: Complex64) -> (Complex64, Complex64, u64) {
    let shift = max_bits(u.coeffs()).saturating_sub(60);
    let mut v = Complex64::new(0.0, 0.0);
    let mut dv = Complex64::new(0.0, 0.0);
    for c in u.coeffs().iter().rev() {
        dv = dv * t + v;
        v = v * t + scaled_f64(c, shift);
    }
    (v, dv, shift)
}

impl FnSequence {
    fn assemble(lambda: Lambda, sign: CriticalSign, lift: Lift, entries: Vec<FnEntry>) -> Self {
        let resultants = (0..entries.len()).map(|_| OnceLock::new()).collect();
        FnSequence { lambda, sign, lift, entries, resultants }
    }

    /// Rebuilds a sequence from stored pairs `F_1..F_n`, recovering each
    /// `content * removed_gcd` by exact division and rejecting any level
    /// where the lift identity fails.
    pub fn from_pairs(
        lambda: &Lambda,
        sign: CriticalSign,
        lift: Lift,
        pairs: Vec<BinaryFormPair>,
    ) -> Result<Self, Per1Error> {
        if pairs.is_empty() {
            return Err(Per1Error::InvalidDepth);
        }
        let mut entries = vec![start_entry(sign)];
        for (i, pair) in pairs.into_iter().enumerate() {
            let n = i + 1;
            let prev = &entries[n - 1].pair;
            let (a, b) = lift_forms(lambda, lift, prev.a(), prev.b());
            let h = a.div_exact(pair.a()).ok_or(Per1Error::Inconsistent(n))?;
            if h.mul(pair.b()) != b {
                return Err(Per1Error::Inconsistent(n));
            }
            let (c, g) = h.content_and_primitive()?;
            let d = g.degree().unwrap_or(0);
            if g.coeff(d).is_negative() || BinaryFormPair::new(pair.a().clone(), pair.b().clone()).is_err() {
                return Err(Per1Error::Inconsistent(n));
            }
            entries.push(FnEntry { n, pair, removed_gcd: g, content: c });
        }
        Ok(FnSequence::assemble(lambda.clone(), sign, lift, entries))
    }

    pub fn lambda(&self) -> &Lambda {
        &self.lambda
    }

    pub fn sign(&self) -> CriticalSign {
        self.sign
    }

    pub fn lift(&self) -> Lift {
        self.lift
    }

    pub fn n_max(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn entries(&self) -> &[FnEntry] {
        &self.entries
    }

    pub fn entry(&self, n: usize) -> Result<&FnEntry, Per1Error> {
        self.entries.get(n).ok_or(Per1Error::LevelUnavailable(n, self.n_max()))
    }

    pub fn degree(&self, n: usize) -> Result<usize, Per1Error> {
        Ok(self.entry(n)?.degree())
    }

    /// `Res(F_n)`, computed once and cached.
    pub fn resultant(&self, n: usize) -> Result<&BigInt, Per1Error> {
        let e = self.entry(n)?;
        if let Some(r) = self.resultants[n].get() {
            return Ok(r);
        }
        let r = e.pair.resultant()?;
        Ok(self.resultants[n].get_or_init(|| r))
    }

    /// The specialised map lift `Phi_x` at the parameter point `x = (x1, x2)`.
    pub fn map_at(&self, x1: &BigInt, x2: &BigInt) -> MapLift {
        MapLift::at_point(&self.lambda, x1, x2, self.lift)
    }

    /// When every level `n >= 2` removed the same gcd form and content,
    /// returns them; the recursion is then uniform beyond the computed depth.
    pub fn uniform_tail(&self) -> Option<(&BinaryForm, &BigInt)> {
        let tail = self.entries.get(2..)?;
        let first = tail.first()?;
        tail.iter()
            .all(|e| e.removed_gcd == first.removed_gcd && e.content == first.content)
            .then_some((&first.removed_gcd, &first.content))
    }

    /// `F_k(x)` for `k = 0..=n_max` at an integer point, exactly.
    ///
    /// Uses `F_k(x) = Phi_x(F_{k-1}(x)) / (c_k g_k(x))` and falls back to
    /// direct evaluation where `g_k(x) = 0`.
    pub fn values_integer(&self, x1: &BigInt, x2: &BigInt) -> Vec<(BigInt, BigInt)> {
        let map = self.map_at(x1, x2);
        let mut out = vec![(BigInt::from(self.sign.value()), BigInt::one())];
        for e in &self.entries[1..] {
            let (w1, w2) = {
                let (z1, z2) = out.last().unwrap();
                map.apply(z1, z2)
            };
            let div = e.removed_gcd.eval_integer(x1, x2) * &e.content;
            let next = if div.is_zero() {
                (e.pair.a().eval_integer(x1, x2), e.pair.b().eval_integer(x1, x2))
            } else {
                (w1 / &div, w2 / &div)
            };
            out.push(next);
        }
        out
    }

    /// `log ||F_k(t1, t2)||` for `k = 0..=n`, via the scaled recursion.
    ///
    /// Returns `None` when some removed gcd vanishes at the point; callers
    /// then use homogeneity or exact evaluation.
    pub fn lognorms_complex(&self, n: usize, t1: Complex64, t2: Complex64) -> Option<Vec<f64>> {
        let p = scaled_f64(self.lambda.p(), 0);
        let q = scaled_f64(self.lambda.q(), 0);
        let mut u = (Complex64::new(self.sign.value() as f64, 0.0), Complex64::new(1.0, 0.0));
        let mut acc = 0.0;
        let mut out = vec![0.0];
        for e in self.entries.get(1..=n)? {
            let (u1, u2) = u;
            let w1 = match self.lift {
                Lift::Standard => p * t2 * u1 * u2,
                Lift::Literal => p * t2 * u1 * u1,
            };
            let w2 = q * (t2 * u1 * u1 + t1 * u1 * u2 + t2 * u2 * u2);
            let (gw, gs) = e.removed_gcd.eval_complex(t1, t2);
            let gn = gw.norm();
            let m = w1.norm().max(w2.norm());
            if gn == 0.0 || !gn.is_finite() || m == 0.0 || !m.is_finite() {
                return None;
            }
            let c_sign = if e.content.is_negative() { -1.0 } else { 1.0 };
            acc = 2.0 * acc + m.ln() - log_abs_bigint(&e.content) - (gn.ln() + gs);
            let rot = gw / gn * c_sign * m;
            u = (w1 / rot, w2 / rot);
            out.push(acc);
        }
        Some(out)
    }

    /// Newton data for `A_n(t,1) - s B_n(t,1)` at complex `t`.
    pub fn newton_data(&self, n: usize, t: Complex64) -> Option<NewtonData> {
        let p = scaled_f64(self.lambda.p(), 0);
        let q = scaled_f64(self.lambda.q(), 0);
        let s = self.sign.value() as f64;
        let one = Complex64::new(1.0, 0.0);
        let mut u = (Complex64::new(s, 0.0), one);
        let mut du = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        let mut acc = 0.0;
        let ln2 = std::f64::consts::LN_2;
        for e in self.entries.get(1..=n)? {
            let (u1, u2) = u;
            let (d1, d2) = du;
            let (w1, dw1) = match self.lift {
                Lift::Standard => (p * u1 * u2, p * (d1 * u2 + u1 * d2)),
                Lift::Literal => (p * u1 * u1, 2.0 * p * u1 * d1),
            };
            let w2 = q * (u1 * u1 + t * u1 * u2 + u2 * u2);
            let dw2 = q * (2.0 * u1 * d1 + u1 * u2 + t * (d1 * u2 + u1 * d2) + 2.0 * u2 * d2);
            let (g, dg, shift) = horner_with_derivative(&e.removed_gcd.dehomogenize(), t);
            if g.norm() == 0.0 || !g.norm().is_finite() {
                return None;
            }
            let v1 = w1 / g;
            let v2 = w2 / g;
            let dv1 = (dw1 * g - w1 * dg) / (g * g);
            let dv2 = (dw2 * g - w2 * dg) / (g * g);
            let m = v1.norm().max(v2.norm());
            if m == 0.0 || !m.is_finite() {
                return None;
            }
            let c_sign = if e.content.is_negative() { -1.0 } else { 1.0 };
            acc = 2.0 * acc + m.ln() - log_abs_bigint(&e.content) - shift as f64 * ln2;
            let k = c_sign * m;
            u = (v1 / k, v2 / k);
            du = (dv1 / k, dv2 / k);
        }
        let num = u.0 - s * u.1;
        let den = du.0 - s * du.1;
        Some(NewtonData { log_abs: acc + num.norm().ln(), ratio: num / den })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfield::Rational;

    fn two() -> Lambda {
        Lambda::from_i64(2).unwrap()
    }

    fn bf(c: &[i64]) -> BinaryForm {
        BinaryForm::from_i64(c)
    }

    #[test]
    fn first_levels_lambda_two() {
        let seq = build_fn(&two(), CriticalSign::Plus, 2, Lift::Standard).unwrap();
        let f1 = &seq.entry(1).unwrap().pair;
        assert_eq!((f1.a(), f1.b()), (&bf(&[2, 0]), &bf(&[2, 1])));
        let e2 = seq.entry(2).unwrap();
        assert_eq!((e2.pair.a(), e2.pair.b()), (&bf(&[8, 4, 0]), &bf(&[8, 8, 3])));
        assert_eq!(e2.removed_gcd, BinaryForm::t2());
        assert_eq!(e2.degree(), 2);
        assert_eq!(seq.resultant(1).unwrap(), &BigInt::from(-2));
        assert_eq!(seq.resultant(2).unwrap(), &BigInt::from(192));
    }

    #[test]
    fn degree_law_and_identity() {
        for sign in CriticalSign::BOTH {
            for lift in [Lift::Standard, Lift::Literal] {
                let seq = build_fn(&"3/2".parse().unwrap(), sign, 5, lift).unwrap();
                for n in 1..=5 {
                    let e = seq.entry(n).unwrap();
                    let dg = e.removed_gcd.degree().unwrap();
                    assert_eq!(e.degree(), 2 * seq.degree(n - 1).unwrap() + 1 - dg);
                }
                let pairs = seq.entries()[1..].iter().map(|e| e.pair.clone()).collect();
                let again = FnSequence::from_pairs(seq.lambda(), sign, lift, pairs).unwrap();
                assert_eq!(again.entries(), seq.entries());
            }
        }
    }

    #[test]
    fn from_pairs_rejects_tampering() {
        let seq = build_fn(&two(), CriticalSign::Plus, 3, Lift::Standard).unwrap();
        let mut pairs: Vec<_> = seq.entries()[1..].iter().map(|e| e.pair.clone()).collect();
        pairs.swap(1, 2);
        assert!(FnSequence::from_pairs(&two(), CriticalSign::Plus, Lift::Standard, pairs).is_err());
    }

    #[test]
    fn periodic_polys() {
        let seq = build_fn(&two(), CriticalSign::Plus, 2, Lift::Standard).unwrap();
        assert_eq!(periodic_parameter_poly(&seq, 1).unwrap(), UniPoly::from_i64(&[0, 1]));
        assert_eq!(periodic_parameter_poly(&seq, 2).unwrap(), UniPoly::from_i64(&[0, 4, 3]));
    }

    #[test]
    fn integer_recursion_matches_horner() {
        let seq = build_fn(&two(), CriticalSign::Minus, 6, Lift::Standard).unwrap();
        for (x1, x2) in [(1i64, 0i64), (0, 1), (3, -7), (-4, 3), (5, 2)] {
            let (x1, x2) = (BigInt::from(x1), BigInt::from(x2));
            let vals = seq.values_integer(&x1, &x2);
            for (k, e) in seq.entries().iter().enumerate() {
                assert_eq!(vals[k].0, e.pair.a().eval_integer(&x1, &x2));
                assert_eq!(vals[k].1, e.pair.b().eval_integer(&x1, &x2));
            }
        }
    }

    #[test]
    fn complex_recursion_matches_exact_logs() {
        let seq = build_fn(&two(), CriticalSign::Plus, 7, Lift::Standard).unwrap();
        for (a, b) in [(0.5, 1.0), (1.0, -0.25), (-1.3, 0.7)] {
            let logs = seq.lognorms_complex(7, Complex64::new(a, 0.0), Complex64::new(b, 0.0)).unwrap();
            let t1 = Rational::new((a * 20.0) as i64, 20).unwrap();
            let t2 = Rational::new((b * 20.0) as i64, 20).unwrap();
            for (k, e) in seq.entries().iter().enumerate() {
                let exact = e
                    .pair
                    .eval_lognorm(
                        &crate::polyforms::FormPoint::Rational(t1.clone(), t2.clone()),
                        crate::qfield::Place::Archimedean,
                    )
                    .unwrap()
                    .value;
                assert!((logs[k] - exact).abs() < 1e-9 * exact.abs().max(1.0), "k={k}");
            }
        }
    }

    #[test]
    fn newton_ratio_matches_polynomial() {
        let seq = build_fn(&two(), CriticalSign::Plus, 4, Lift::Standard).unwrap();
        let e = seq.entry(4).unwrap();
        let poly = &e.pair.a().dehomogenize() - &e.pair.b().dehomogenize();
        let dpoly = poly.derivative();
        let t = Complex64::new(-0.4, 0.9);
        let eval = |u: &UniPoly| {
            u.coeffs().iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * t + scaled_f64(c, 0))
        };
        let nd = seq.newton_data(4, t).unwrap();
        let ratio = eval(&poly) / eval(&dpoly);
        assert!((nd.ratio - ratio).norm() < 1e-10 * ratio.norm());
        assert!((nd.log_abs - eval(&poly).norm().ln()).abs() < 1e-10);
    }
}
