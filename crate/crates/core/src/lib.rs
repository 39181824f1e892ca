//! Boundary triplets of nondensely defined symmetric operators in finite
//! dimension, their Weyl functions, and the K,B-transform K*(B − M(z))⁻¹K.
//!
//! Module map: [`relations`] for subspaces and linear relations, [`measures`]
//! for operator measures, [`herglotz`] for matrix Herglotz functions,
//! [`triplets`] for boundary triplets, [`realization`] for systems and
//! [`equivalence`] for the uniqueness checks built on all of them.

pub mod equivalence;
pub mod error;
pub mod herglotz;
pub mod linalg;
pub mod measures;
pub mod realization;
pub mod relations;
pub mod triplets;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/relations.md")]
    mod relations {}
    #[doc = include_str!("../../../book/src/measures.md")]
    mod measures {}
    #[doc = include_str!("../../../book/src/herglotz.md")]
    mod herglotz {}
    #[doc = include_str!("../../../book/src/triplets.md")]
    mod triplets {}
    #[doc = include_str!("../../../book/src/realization.md")]
    mod realization {}
    #[doc = include_str!("../../../book/src/equivalence.md")]
    mod equivalence {}
}
