//! Exact and numerical arithmetic dynamics for the one-parameter family
//! `Per1(lambda)`: `f_t(z) = lambda z / (z^2 + t z + 1)` over the rationals.
//!
//! The crate is organised bottom-up:
//!
//! * [`qfield`]: rationals, places, valuations, the product formula and the
//!   Weil height.
//! * [`polyforms`]: homogeneous integer binary forms, gcds, resultants and
//!   overflow-safe evaluation.
//! * [`per1`]: orbits, the critical-orbit lifts `F_n`, periodic-parameter
//!   polynomials and a complex root finder.
//! * [`potentials`]: escape rates, the `gamma` series, capacities, radii,
//!   Green functions and energies.
//! * [`heights`]: Call–Silverman heights (two routes), quasi-adelic heights,
//!   PCF detection and scans.
//! * [`equilab`]: small-height parameter sets and energy trends.

pub mod equilab;
pub mod heights;
pub mod numeric;
pub mod per1;
pub mod polyforms;
pub mod potentials;
pub mod qfield;

pub use per1::{CriticalSign, Lambda, Lift};
pub use polyforms::{BinaryForm, BinaryFormPair, UniPoly};
pub use potentials::{PotentialValue, Provenance};
pub use qfield::{LogAbs, Place, Prime, Rational};
