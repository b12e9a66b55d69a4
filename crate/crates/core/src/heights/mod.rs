//! Canonical heights: Call–Silverman heights of the critical points by a
//! global and a local route, quasi-adelic heights as truncated sums of
//! normalised local potentials, the combined height with its `L` shift,
//! PCF detection and parameter scans.

mod callsilverman;
mod quasi;
mod scans;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::per1::{CriticalSign, Per1Error};
use crate::potentials::{PotentialError, PotentialValue};
use crate::qfield::{Place, QError, Rational};

pub use callsilverman::{callsilverman_direct, callsilverman_local};
pub use quasi::{combined_height, quasi_adelic_height, quasi_adelic_height_at};
pub use scans::{
    finiteness_scan, pcf_scan, rationals_by_height, sandwich_check, FinitenessHit, PcfStatus, SandwichReport,
    SandwichRow,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeightError {
    #[error("depth {0} is below the minimum {1}")]
    InvalidDepth(usize, usize),
    #[error("degenerate parameter: Res(Phi_t) = 0")]
    DegenerateParameter,
    #[error("threshold must be positive")]
    InvalidDelta,
    #[error("prime bound must be at least 2")]
    InvalidPrimeBound,
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Per1(#[from] Per1Error),
    #[error(transparent)]
    Q(#[from] QError),
}

/// Which construction produced a [`HeightReport`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeightMethod {
    CallSilvermanLocal,
    QuasiAdelic,
}

impl HeightMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            HeightMethod::CallSilvermanLocal => "callsilverman-local",
            HeightMethod::QuasiAdelic => "quasi-adelic",
        }
    }
}

/// One place's contribution to a height.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaceContribution {
    pub place: Place,
    pub value: PotentialValue,
}

/// A height as a sum of local terms over a finite set of places.
///
/// `total.value` is the sum of the listed contributions; `total.error` is
/// the sum of their errors plus `tail`, a bound for everything the listed
/// places leave out.
#[derive(Clone, Debug, PartialEq)]
pub struct HeightReport {
    pub t: Rational,
    pub sign: CriticalSign,
    pub method: HeightMethod,
    pub places: Vec<PlaceContribution>,
    pub prime_bound: Option<u64>,
    pub tail: f64,
    pub total: PotentialValue,
}

impl HeightReport {
    pub(crate) fn assemble(
        t: Rational,
        sign: CriticalSign,
        method: HeightMethod,
        places: Vec<PlaceContribution>,
        prime_bound: Option<u64>,
        tail: f64,
    ) -> Self {
        let mut value = 0.0;
        let mut error = tail;
        let mut tag = crate::potentials::Provenance::Exact;
        for c in &places {
            value += c.value.value;
            error += c.value.error;
            tag = tag.combine(c.value.tag);
        }
        let total = PotentialValue::new(value, error, tag);
        HeightReport { t, sign, method, places, prime_bound, tail, total }
    }

    pub fn contribution(&self, v: Place) -> Option<&PotentialValue> {
        self.places.iter().find(|c| c.place == v).map(|c| &c.value)
    }
}

struct PlaceJson<'a>(&'a PlaceContribution);

impl Serialize for PlaceJson<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Place", 4)?;
        st.serialize_field("place", &self.0.place)?;
        st.serialize_field("value", &self.0.value.value)?;
        st.serialize_field("error", &self.0.value.error)?;
        st.serialize_field("tag", &self.0.value.tag)?;
        st.end()
    }
}

impl Serialize for HeightReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("HeightReport", 9)?;
        st.serialize_field("t", &self.t)?;
        st.serialize_field("sign", &self.sign)?;
        st.serialize_field("method", self.method.as_str())?;
        let places: Vec<PlaceJson<'_>> = self.places.iter().map(PlaceJson).collect();
        st.serialize_field("places", &places)?;
        st.serialize_field("P", &self.prime_bound)?;
        st.serialize_field("tail", &self.tail)?;
        st.serialize_field("total", &self.total.value)?;
        st.serialize_field("total_error", &self.total.error)?;
        st.serialize_field("tag", &self.total.tag)?;
        st.end()
    }
}
