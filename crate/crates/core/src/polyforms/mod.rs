//! Homogeneous integer binary forms in `(t1, t2)`: content, gcd, resultants
//! and exact or renormalised evaluation.
//!
//! Coefficient layout: `c_k` multiplies `t1^k t2^(d-k)`. The cache format
//! depends on this layout.

mod form;
mod pair;
pub mod resultant;
mod univariate;

use thiserror::Error;

pub use form::{form_gcd, BinaryForm};
pub use pair::{BinaryFormPair, FormPoint};
pub(crate) use pair::clear_denominators;
pub use resultant::{resultant_bareiss, resultant_forms, resultant_subresultant};
pub use univariate::UniPoly;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("operation undefined for the zero form")]
    ZeroForm,
    #[error("forms must have equal degree")]
    DegreeMismatch,
    #[error("resultant needs forms of degree at least 1")]
    ConstantForms,
    #[error("pair has nontrivial common content")]
    NotPrimitive,
    #[error("pair has a nonconstant common factor")]
    NotCoprime,
    #[error("evaluation point is (0, 0)")]
    ZeroPoint,
    #[error("complex points can only be evaluated at the archimedean place")]
    ComplexAtFinitePlace,
    #[error("malformed form serialisation: {0}")]
    Parse(String),
}
