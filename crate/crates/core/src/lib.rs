//! Harmonic maps from the Riemann sphere to the complex projective plane.

pub mod bipoly;
pub mod eellswood;
pub mod error;
pub mod holomap;
pub mod matrix;
pub mod numeric;
pub mod paths;
pub mod poly;
pub mod quadrature;
pub mod scalar;
pub mod selftest;
pub mod strata;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/exact-algebra.md")]
    mod exact_algebra {}
    #[doc = include_str!("../../../book/src/holomorphic-maps.md")]
    mod holomorphic_maps {}
    #[doc = include_str!("../../../book/src/gauss-transform.md")]
    mod gauss_transform {}
    #[doc = include_str!("../../../book/src/quadrature.md")]
    mod quadrature {}
    #[doc = include_str!("../../../book/src/strata.md")]
    mod strata {}
    #[doc = include_str!("../../../book/src/paths.md")]
    mod paths {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
