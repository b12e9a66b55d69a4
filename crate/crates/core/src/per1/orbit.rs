//! Exact iteration of `f_t` on the projective line.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{CriticalSign, Lambda, Lift};
use crate::polyforms::{resultant_bareiss, BinaryForm};
use crate::qfield::{weil_height_pair, Rational};

/// A point of `P^1(Q)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ProjPoint {
    Finite(Rational),
    Infinity,
}

impl ProjPoint {
    /// Coprime integer lift `(z1, z2)` with `z2 >= 0`; infinity is `(1, 0)`.
    pub fn lift(&self) -> (BigInt, BigInt) {
        match self {
            ProjPoint::Finite(x) => (x.numer().clone(), x.denom().clone()),
            ProjPoint::Infinity => (BigInt::one(), BigInt::zero()),
        }
    }

    /// The point `[z1 : z2]`; `None` for `(0, 0)`.
    pub fn from_lift(z1: &BigInt, z2: &BigInt) -> Option<Self> {
        if z2.is_zero() {
            return (!z1.is_zero()).then_some(ProjPoint::Infinity);
        }
        Rational::new(z1.clone(), z2.clone()).ok().map(ProjPoint::Finite)
    }

    pub fn weil_height(&self) -> f64 {
        let (a, b) = self.lift();
        weil_height_pair(&a, &b)
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjPoint::Finite(x) => x.fmt(f),
            ProjPoint::Infinity => f.write_str("inf"),
        }
    }
}

/// A quadratic map `(z1, z2) -> (A(z), B(z))` given by integer forms of
/// degree 2 (coefficient `k` multiplies `z1^k z2^(2-k)`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapLift {
    a: BinaryForm,
    b: BinaryForm,
}

impl MapLift {
    /// The lift of `f_t` at the parameter point `t = x1 / x2`:
    /// `(p x2 z1 z2, q (x2 z1^2 + x1 z1 z2 + x2 z2^2))`, first coordinate
    /// `p x2 z1^2` for the paper-literal variant.
    pub fn at_point(lambda: &Lambda, x1: &BigInt, x2: &BigInt, lift: Lift) -> Self {
        let px2 = lambda.p() * x2;
        let a = match lift {
            Lift::Standard => vec![BigInt::zero(), px2, BigInt::zero()],
            Lift::Literal => vec![BigInt::zero(), BigInt::zero(), px2],
        };
        let q = lambda.q();
        let b = vec![q * x2, q * x1, q * x2];
        MapLift { a: BinaryForm::new(a), b: BinaryForm::new(b) }
    }

    /// The lift of `f_t` itself (standard first coordinate).
    pub fn new(lambda: &Lambda, t: &Rational) -> Self {
        MapLift::at_point(lambda, t.numer(), t.denom(), Lift::Standard)
    }

    pub fn from_forms(a: BinaryForm, b: BinaryForm) -> Self {
        MapLift { a, b }
    }

    pub fn a(&self) -> &BinaryForm {
        &self.a
    }

    pub fn b(&self) -> &BinaryForm {
        &self.b
    }

    /// Divides out the joint content of both coordinates.
    pub fn primitive(&self) -> Self {
        let c = self.a.coeffs().iter().chain(self.b.coeffs()).fold(BigInt::zero(), |g, x| g.gcd(x));
        if c.is_zero() || c.is_one() {
            return self.clone();
        }
        let div = |f: &BinaryForm| BinaryForm::new(f.coeffs().iter().map(|x| x / &c).collect());
        MapLift { a: div(&self.a), b: div(&self.b) }
    }

    pub fn apply(&self, z1: &BigInt, z2: &BigInt) -> (BigInt, BigInt) {
        (self.a.eval_integer(z1, z2), self.b.eval_integer(z1, z2))
    }

    /// Sylvester resultant of the two quadratic forms.
    pub fn resultant(&self) -> BigInt {
        let pad = |f: &BinaryForm| {
            let mut v = f.coeffs().to_vec();
            v.resize(3, BigInt::zero());
            BinaryForm::new(v)
        };
        resultant_bareiss(&pad(&self.a), &pad(&self.b), 2).unwrap_or_default()
    }

    /// `log max(sum |a_k|, sum |b_k|)`, an upper bound for
    /// `log ||Phi(z)||` on the unit max-norm sphere.
    pub fn log_row_norm(&self) -> f64 {
        let row = |f: &BinaryForm| f.coeffs().iter().fold(BigInt::zero(), |s, c| s + c.abs());
        let m = row(&self.a).max(row(&self.b));
        crate::numeric::log_abs_bigint(&m)
    }

    /// The constant `K` of the Macaulay identities `G_i A + H_i B = R z_i^3`
    /// with linear `G_i, H_i`: `K = max_i (||G_i||_1 + ||H_i||_1)`.
    ///
    /// Then `||Phi(z)|| >= |R| ||z||^2 / K` for every `z`, at every place
    /// in the archimedean sense. `None` when `R = 0`.
    pub fn macaulay_constant(&self) -> Option<Rational> {
        let r = self.resultant();
        if r.is_zero() {
            return None;
        }
        let c = |f: &BinaryForm, k: isize| -> Rational {
            if k < 0 {
                Rational::zero()
            } else {
                Rational::from_integer(f.coeff(k as usize))
            }
        };
        let mut m = vec![vec![Rational::zero(); 4]; 4];
        for k in 0..4isize {
            let row = &mut m[k as usize];
            row[0] = c(&self.a, k);
            row[1] = c(&self.a, k - 1);
            row[2] = c(&self.b, k);
            row[3] = c(&self.b, k - 1);
        }
        let mut k_max = Rational::zero();
        for target in [3usize, 0usize] {
            let mut rhs = vec![Rational::zero(); 4];
            rhs[target] = Rational::from_integer(r.clone());
            let x = solve_rational(m.clone(), rhs)?;
            let s = x.iter().fold(Rational::zero(), |acc, v| acc + v.abs());
            if s > k_max {
                k_max = s;
            }
        }
        Some(k_max)
    }
}

/// Gaussian elimination over `Q`; `None` for a singular system.
fn solve_rational(mut m: Vec<Vec<Rational>>, mut rhs: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] / &m[col][col];
            for c in col..n {
                let v = &m[col][c] * &f;
                m[r][c] = &m[r][c] - &v;
            }
            let v = &rhs[col] * &f;
            rhs[r] = &rhs[r] - &v;
        }
    }
    Some((0..n).map(|i| &rhs[i] / &m[i][i]).collect())
}

/// `f_t(z) = lambda z / (z^2 + t z + 1)`; a pole gives `Infinity`.
pub fn f_apply(lambda: &Lambda, t: &Rational, z: &Rational) -> ProjPoint {
    f_apply_point(lambda, t, &ProjPoint::Finite(z.clone()))
}

/// `f_t` on `P^1(Q)`, through the coprime lift.
pub fn f_apply_point(lambda: &Lambda, t: &Rational, z: &ProjPoint) -> ProjPoint {
    let (z1, z2) = z.lift();
    let (w1, w2) = MapLift::new(lambda, t).apply(&z1, &z2);
    ProjPoint::from_lift(&w1, &w2).expect("nonzero resultant keeps lifts nonzero")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitOptions {
    /// `H0` in the blowup bound `h(x_n) > H0 + n log 4`.
    pub blowup_h0: f64,
    /// Stop with `HitPole` when the orbit reaches infinity.
    pub stop_at_pole: bool,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        OrbitOptions { blowup_h0: 64.0, stop_at_pole: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrbitStatus {
    /// `points[tail + period] == points[tail]`.
    Preperiodic { tail: usize, period: usize },
    BudgetExhausted,
    HitPole { index: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitReport {
    /// `x_0 = ±1, x_1, ...`; a detected cycle repeats its first point.
    pub points: Vec<ProjPoint>,
    pub status: OrbitStatus,
    /// First index whose height exceeds `log K` of the Macaulay bound,
    /// which proves the orbit infinite.
    pub escape_certified_at: Option<usize>,
}

impl OrbitReport {
    pub fn is_preperiodic(&self) -> bool {
        matches!(self.status, OrbitStatus::Preperiodic { .. })
    }
}

/// Iterates `f_t` from the critical point `s` for at most `budget` steps.
///
/// Stops on an exact repeat, on the blowup bound, at a pole when asked, or
/// once escape is certified: `h(f(x)) >= 2 h(x) - log K` makes heights grow
/// without bound as soon as `h(x) > log K`.
pub fn critical_orbit(
    lambda: &Lambda,
    t: &Rational,
    s: CriticalSign,
    budget: usize,
    opts: &OrbitOptions,
) -> OrbitReport {
    let map = MapLift::new(lambda, t).primitive();
    let log_k = map.macaulay_constant().map(|k| k.to_f64().ln());
    let start = ProjPoint::Finite(Rational::from(s.value()));
    let mut points = vec![start.clone()];
    let mut seen: HashMap<ProjPoint, usize> = HashMap::from([(start, 0)]);
    let mut escape = None;
    let log4 = 4f64.ln();
    for i in 1..=budget {
        let x = f_apply_point(lambda, t, &points[i - 1]);
        points.push(x.clone());
        if let Some(&tail) = seen.get(&x) {
            let status = OrbitStatus::Preperiodic { tail, period: i - tail };
            return OrbitReport { points, status, escape_certified_at: None };
        }
        seen.insert(x.clone(), i);
        if opts.stop_at_pole && x == ProjPoint::Infinity {
            return OrbitReport { points, status: OrbitStatus::HitPole { index: i }, escape_certified_at: None };
        }
        let h = x.weil_height();
        if let Some(lk) = log_k {
            if h > lk {
                escape = Some(i);
                break;
            }
        }
        if h > opts.blowup_h0 + i as f64 * log4 {
            break;
        }
    }
    OrbitReport { points, status: OrbitStatus::BudgetExhausted, escape_certified_at: escape }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn two() -> Lambda {
        Lambda::from_i64(2).unwrap()
    }

    #[test]
    fn apply_examples() {
        let l = two();
        assert_eq!(f_apply(&l, &q("0"), &q("1")), ProjPoint::Finite(q("1")));
        assert_eq!(f_apply(&l, &q("0"), &q("-1")), ProjPoint::Finite(q("-1")));
        assert_eq!(f_apply(&l, &q("-4/3"), &q("1")), ProjPoint::Finite(q("3")));
        // z^2 - 2z + 1 = 0 at z = 1 when t = -2.
        assert_eq!(f_apply(&l, &q("-2"), &q("1")), ProjPoint::Infinity);
        assert_eq!(f_apply_point(&l, &q("5"), &ProjPoint::Infinity), ProjPoint::Finite(q("0")));
    }

    #[test]
    fn orbit_examples() {
        let l = two();
        let o = OrbitOptions::default();
        let r = critical_orbit(&l, &q("0"), CriticalSign::Plus, 10, &o);
        assert_eq!(r.status, OrbitStatus::Preperiodic { tail: 0, period: 1 });
        let r = critical_orbit(&l, &q("-4/3"), CriticalSign::Plus, 10, &o);
        assert_eq!(r.status, OrbitStatus::Preperiodic { tail: 0, period: 2 });
        assert_eq!(r.points, [q("1"), q("3"), q("1")].map(ProjPoint::Finite));
        let r = critical_orbit(&l, &q("1"), CriticalSign::Plus, 50, &o);
        assert_eq!(r.status, OrbitStatus::BudgetExhausted);
        assert_eq!(r.points[1], ProjPoint::Finite(q("2/3")));
        assert_eq!(r.points[2], ProjPoint::Finite(q("12/19")));
        assert!(r.escape_certified_at.is_some());
    }

    #[test]
    fn pole_passes_through_infinity() {
        let l = two();
        let r = critical_orbit(&l, &q("-2"), CriticalSign::Plus, 10, &OrbitOptions::default());
        // 1 -> inf -> 0 -> 0
        assert_eq!(r.status, OrbitStatus::Preperiodic { tail: 2, period: 1 });
        assert_eq!(r.points[1], ProjPoint::Infinity);
        let opts = OrbitOptions { stop_at_pole: true, ..OrbitOptions::default() };
        let r = critical_orbit(&l, &q("-2"), CriticalSign::Plus, 10, &opts);
        assert_eq!(r.status, OrbitStatus::HitPole { index: 1 });
    }

    #[test]
    fn macaulay_lower_bound_holds() {
        let l = two();
        for t in ["1", "-4/3", "7/2", "0"] {
            let map = MapLift::new(&l, &q(t)).primitive();
            let r = map.resultant();
            let k = map.macaulay_constant().unwrap().to_f64();
            for (z1, z2) in [(1i64, 0i64), (0, 1), (3, -7), (12, 19), (-5, 2)] {
                let (z1, z2) = (BigInt::from(z1), BigInt::from(z2));
                let (w1, w2) = map.apply(&z1, &z2);
                let norm = |a: &BigInt, b: &BigInt| a.abs().max(b.abs());
                let lhs = crate::numeric::log_abs_bigint(&norm(&w1, &w2));
                let rhs = crate::numeric::log_abs_bigint(&r) + 2.0 * crate::numeric::log_abs_bigint(&norm(&z1, &z2)) - k.ln();
                assert!(lhs >= rhs - 1e-12, "t={t}");
            }
        }
    }
}
