//! Equidistribution experiments: the small-height parameter sets `S_n`,
//! their discrete energies against the normalised archimedean potential,
//! point-cloud export and annulus histograms.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::per1::{CriticalSign, ParameterSet, Per1Error, RootOptions};
use crate::potentials::{
    pair_energy_complex, Family, HomogeneousPotential, NormalizedPotential, PotentialError, PotentialValue,
};
use crate::polyforms::FormPoint;
use crate::qfield::Place;

#[derive(Debug, Error)]
pub enum EquilabError {
    #[error("level {0} outside 1..={1}")]
    InvalidLevel(usize, usize),
    #[error("levels must be strictly ascending and nonempty")]
    NotAscending,
    #[error("annulus radii must be positive and strictly ascending")]
    InvalidBins,
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Per1(#[from] Per1Error),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

/// `S_n^s`: the roots of the level-`n` periodic-parameter polynomial.
pub fn build_sn(family: &Family, s: CriticalSign, n: usize, opts: &RootOptions) -> Result<ParameterSet, EquilabError> {
    if n == 0 || n > family.n_max() {
        return Err(EquilabError::InvalidLevel(n, family.n_max()));
    }
    Ok(ParameterSet::periodic(family.sequence(s), n, opts)?)
}

/// Energies of `S_n` against `mu_inf^s` along a list of levels.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyTrend {
    pub sign: CriticalSign,
    pub place: Place,
    pub levels: Vec<usize>,
    pub energies: Vec<PotentialValue>,
    /// Sizes `|S_n|`.
    pub sizes: Vec<usize>,
    /// `((N-1)/2N) (2 min G - log diam)`, a floor for each energy.
    pub lower_bounds: Vec<f64>,
}

impl EnergyTrend {
    pub fn energy_at(&self, n: usize) -> Option<&PotentialValue> {
        self.levels.iter().position(|&m| m == n).map(|i| &self.energies[i])
    }

    /// `E(S_a) < E(S_b)`, both present.
    pub fn signed_below(&self, a: usize, b: usize) -> Option<bool> {
        Some(self.energy_at(a)?.value < self.energy_at(b)?.value)
    }

    /// `|E(S_a)| < |E(S_b)|`, both present.
    pub fn magnitude_below(&self, a: usize, b: usize) -> Option<bool> {
        Some(self.energy_at(a)?.value.abs() < self.energy_at(b)?.value.abs())
    }
}

impl Serialize for EnergyTrend {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("EnergyTrend", 6)?;
        st.serialize_field("n", &self.levels)?;
        st.serialize_field("energy", &self.energies.iter().map(|e| e.value).collect::<Vec<_>>())?;
        st.serialize_field("energy_error", &self.energies.iter().map(|e| e.error).collect::<Vec<_>>())?;
        st.serialize_field("size", &self.sizes)?;
        st.serialize_field("place", &self.place)?;
        st.serialize_field("sign", &self.sign)?;
        st.end()
    }
}

/// Pair energies of `S_n^s` for each `n` in `levels` at the archimedean
/// place, against `G_s + 1/2 log cap`.
pub fn energy_trend(
    family: &Family,
    s: CriticalSign,
    levels: &[usize],
    opts: &RootOptions,
) -> Result<EnergyTrend, EquilabError> {
    if levels.is_empty() || levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EquilabError::NotAscending);
    }
    let pot = NormalizedPotential::new(family, s, Place::Archimedean)?;
    let mut energies = Vec::with_capacity(levels.len());
    let mut sizes = Vec::with_capacity(levels.len());
    let mut lower_bounds = Vec::with_capacity(levels.len());
    for &n in levels {
        let set = build_sn(family, s, n, opts)?;
        let zs = set.points();
        energies.push(pair_energy_complex(&pot, &zs)?);
        lower_bounds.push(energy_floor(&pot, &zs)?);
        sizes.push(zs.len());
    }
    Ok(EnergyTrend { sign: s, place: Place::Archimedean, levels: levels.to_vec(), energies, sizes, lower_bounds })
}

/// Floor for the pair energy from `-log |z_i - z_j| >= -log diam` and
/// `G >= min G` on the cloud.
fn energy_floor(pot: &dyn HomogeneousPotential, zs: &[Complex64]) -> Result<f64, EquilabError> {
    let n = zs.len();
    if n <= 1 {
        return Ok(0.0);
    }
    let mut diam: f64 = 0.0;
    for (i, a) in zs.iter().enumerate() {
        for b in &zs[i + 1..] {
            diam = diam.max((a - b).norm());
        }
    }
    let one = Complex64::new(1.0, 0.0);
    let mut min_g = f64::INFINITY;
    for &z in zs {
        let g = pot.eval(&FormPoint::Complex(z, one))?;
        min_g = min_g.min(g.value - g.error);
    }
    let nf = n as f64;
    Ok((nf - 1.0) / (2.0 * nf) * (2.0 * min_g - diam.ln()))
}

/// Renders `re,im,residual` rows sorted by `(re, im)`.
pub fn pointcloud_csv(set: &ParameterSet) -> String {
    let mut roots = set.roots.clone();
    roots.sort_by(|a, b| a.z.re.total_cmp(&b.z.re).then(a.z.im.total_cmp(&b.z.im)));
    let mut out = String::from("re,im,residual\n");
    for r in roots {
        writeln!(out, "{:?},{:?},{:?}", r.z.re, r.z.im, r.residual).expect("write to String");
    }
    out
}

/// Writes [`pointcloud_csv`] to `path`.
pub fn pointcloud_export(set: &ParameterSet, path: &Path) -> Result<(), EquilabError> {
    std::fs::write(path, pointcloud_csv(set))?;
    Ok(())
}

/// Fraction of a point set in each annulus around a centre.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnnulusHistogram {
    pub center: (f64, f64),
    /// Outer radii; annulus `i` is `radii[i-1] <= |z - c| < radii[i]` with
    /// `radii[-1] = 0`.
    pub radii: Vec<f64>,
    pub masses: Vec<f64>,
    /// Mass at distance `>= radii.last()`.
    pub outer: f64,
}

impl AnnulusHistogram {
    pub fn total(&self) -> f64 {
        self.masses.iter().sum::<f64>() + self.outer
    }
}

pub fn annulus_histogram(
    set: &ParameterSet,
    center: Complex64,
    radii: &[f64],
) -> Result<AnnulusHistogram, EquilabError> {
    if radii.is_empty() || radii[0] <= 0.0 || radii.windows(2).any(|w| w[0] >= w[1]) || radii.iter().any(|r| !r.is_finite())
    {
        return Err(EquilabError::InvalidBins);
    }
    let mut counts = vec![0usize; radii.len()];
    let mut outer = 0usize;
    for r in &set.roots {
        let d = (r.z - center).norm();
        match radii.iter().position(|&b| d < b) {
            Some(i) => counts[i] += 1,
            None => outer += 1,
        }
    }
    let total = set.roots.len().max(1) as f64;
    Ok(AnnulusHistogram {
        center: (center.re, center.im),
        radii: radii.to_vec(),
        masses: counts.iter().map(|&c| c as f64 / total).collect(),
        outer: outer as f64 / total,
    })
}

/// Each root has a conjugate partner within `eps` (relative to `max(1, |z|)`).
pub fn conjugation_closed(set: &ParameterSet, eps: f64) -> bool {
    set.roots.iter().all(|r| {
        let c = r.z.conj();
        set.roots.iter().any(|q| (q.z - c).norm() <= eps * r.z.norm().max(1.0))
    })
}
