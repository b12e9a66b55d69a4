//! Local potential theory for the family: escape rates `G_v^±`, the
//! `gamma_v(lambda)` series, capacities from resultants, radii, normalised
//! potentials, Arakelov–Green functions and discrete energies.

mod capacity;
mod escape;
mod gamma;
mod green;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::per1::{build_fn, CriticalSign, FnSequence, Lambda, Lift, Per1Error};
use crate::polyforms::PolyError;
use crate::qfield::{Prime, QError, Rational};

pub use capacity::{CapacityEstimate, RadiiReport};
pub(crate) use escape::tail_data_for;
pub use escape::EscapeLevels;
pub use gamma::{gamma_series, geometric_partial_sums};
pub use green::{
    green, pair_energy, pair_energy_complex, CombinedPotential, HomogeneousPotential, LEstimate, MeasureSpec,
    NormalizedPotential, ReferencePotential,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("tolerance must be positive")]
    InvalidTolerance,
    #[error("degenerate iterate: Res(F_{0}) = 0")]
    DegenerateIterate(usize),
    #[error("grid size must be at least {0}")]
    GridTooSmall(usize),
    #[error("invalid measure weights: {0}")]
    InvalidWeights(String),
    #[error("proxy point set is empty")]
    EmptyProxy,
    #[error("evaluation point is (0, 0)")]
    ZeroPoint,
    #[error("at least {0} levels are needed")]
    TooShallow(usize),
    #[error("numerical evaluation failed at {0}")]
    Numerical(String),
    #[error(transparent)]
    Per1(#[from] Per1Error),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Q(#[from] QError),
}

/// How an error radius was obtained.
///
/// `Exact`, `SeriesTail` and `StabilizedValuation` are certified bounds;
/// `Extrapolated` and `Jackknife` are heuristic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Exact,
    SeriesTail,
    StabilizedValuation,
    Extrapolated,
    Jackknife,
}

impl Provenance {
    pub fn is_certified(self) -> bool {
        matches!(self, Provenance::Exact | Provenance::SeriesTail | Provenance::StabilizedValuation)
    }

    fn rank(self) -> u8 {
        match self {
            Provenance::Exact => 0,
            Provenance::SeriesTail | Provenance::StabilizedValuation => 1,
            Provenance::Extrapolated | Provenance::Jackknife => 2,
        }
    }

    /// The weaker of two provenances.
    pub fn combine(self, other: Provenance) -> Provenance {
        if other.rank() > self.rank() {
            other
        } else {
            self
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Exact => "exact",
            Provenance::SeriesTail => "series-tail",
            Provenance::StabilizedValuation => "stabilized-valuation",
            Provenance::Extrapolated => "extrapolated",
            Provenance::Jackknife => "jackknife",
        })
    }
}

/// `value = coeff * ln p` exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogPMultiple {
    pub coeff: Rational,
    pub prime: Prime,
}

impl LogPMultiple {
    pub fn new(coeff: Rational, prime: Prime) -> Self {
        LogPMultiple { coeff, prime }
    }

    pub fn value(&self) -> f64 {
        self.coeff.to_f64() * self.prime.ln()
    }
}

/// A real estimate with an error radius and its provenance.
///
/// At finite places the value may carry an exact rational multiple of
/// `ln p`, used for bit-exact bookkeeping.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PotentialValue {
    pub value: f64,
    pub error: f64,
    pub tag: Provenance,
    #[serde(skip)]
    pub log_p: Option<LogPMultiple>,
}

impl PotentialValue {
    pub fn new(value: f64, error: f64, tag: Provenance) -> Self {
        debug_assert!(error >= 0.0 || error.is_nan());
        PotentialValue { value, error: error.max(0.0), tag, log_p: None }
    }

    pub fn exact(value: f64) -> Self {
        PotentialValue::new(value, 0.0, Provenance::Exact)
    }

    /// A value `coeff * ln p` with the given error.
    pub fn log_p(coeff: Rational, prime: Prime, error: f64, tag: Provenance) -> Self {
        let m = LogPMultiple::new(coeff, prime);
        PotentialValue { value: m.value(), error, tag, log_p: Some(m) }
    }

    /// Sum with errors added; exact `ln p` bookkeeping survives when both
    /// terms carry it for the same prime.
    pub fn add(&self, other: &PotentialValue) -> PotentialValue {
        let log_p = match (&self.log_p, &other.log_p) {
            (Some(a), Some(b)) if a.prime == b.prime => Some(LogPMultiple::new(&a.coeff + &b.coeff, a.prime)),
            _ => None,
        };
        let value = log_p.as_ref().map_or(self.value + other.value, LogPMultiple::value);
        PotentialValue { value, error: self.error + other.error, tag: self.tag.combine(other.tag), log_p }
    }

    /// Multiplication by an exact rational weight.
    pub fn scale(&self, w: &Rational) -> PotentialValue {
        let wf = w.to_f64();
        let log_p = self.log_p.as_ref().map(|m| LogPMultiple::new(&m.coeff * w, m.prime));
        let value = log_p.as_ref().map_or(self.value * wf, LogPMultiple::value);
        PotentialValue { value, error: self.error * wf.abs(), tag: self.tag, log_p }
    }

    pub fn neg(&self) -> PotentialValue {
        self.scale(&Rational::from(-1))
    }

    /// `|x - value| <= error + slack`.
    pub fn contains(&self, x: f64, slack: f64) -> bool {
        (x - self.value).abs() <= self.error + slack
    }

    pub fn is_certified(&self) -> bool {
        self.tag.is_certified()
    }
}

/// `log ||F_n||` (plain) or `log+ ||F_n||` (clamped at 0) in the escape limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum EscapeMode {
    #[default]
    LogPlain,
    LogPlus,
}

impl fmt::Display for EscapeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EscapeMode::LogPlain => "log-plain",
            EscapeMode::LogPlus => "log-plus",
        })
    }
}

impl FromStr for EscapeMode {
    type Err = PotentialError;
    fn from_str(s: &str) -> Result<Self, PotentialError> {
        match s.trim() {
            "log-plain" => Ok(EscapeMode::LogPlain),
            "log-plus" => Ok(EscapeMode::LogPlus),
            other => Err(PotentialError::Q(QError::Parse(other.to_string()))),
        }
    }
}

/// Both critical-orbit sequences of one `lambda` at a fixed depth, shared
/// read-only by every potential computation.
#[derive(Clone, Debug)]
pub struct Family {
    lambda: Lambda,
    lift: Lift,
    escape: EscapeMode,
    plus: FnSequence,
    minus: FnSequence,
}

impl Family {
    /// Builds `F_n^+` and `F_n^-` to depth `n_max` in parallel.
    pub fn new(lambda: &Lambda, lift: Lift, n_max: usize, escape: EscapeMode) -> Result<Self, PotentialError> {
        let (plus, minus) = rayon::join(
            || build_fn(lambda, CriticalSign::Plus, n_max, lift),
            || build_fn(lambda, CriticalSign::Minus, n_max, lift),
        );
        Ok(Family::from_sequences(plus?, minus?, escape))
    }

    /// Wraps prebuilt sequences (for example loaded from a cache).
    pub fn from_sequences(plus: FnSequence, minus: FnSequence, escape: EscapeMode) -> Self {
        assert_eq!(plus.lambda(), minus.lambda(), "sequences of different lambda");
        assert_eq!(plus.n_max(), minus.n_max(), "sequences of different depth");
        assert_eq!(plus.sign(), CriticalSign::Plus);
        assert_eq!(minus.sign(), CriticalSign::Minus);
        Family { lambda: plus.lambda().clone(), lift: plus.lift(), escape, plus, minus }
    }

    pub fn lambda(&self) -> &Lambda {
        &self.lambda
    }

    pub fn lift(&self) -> Lift {
        self.lift
    }

    pub fn escape_mode(&self) -> EscapeMode {
        self.escape
    }

    pub fn n_max(&self) -> usize {
        self.plus.n_max()
    }

    pub fn sequence(&self, s: CriticalSign) -> &FnSequence {
        match s {
            CriticalSign::Plus => &self.plus,
            CriticalSign::Minus => &self.minus,
        }
    }
}
