//! Numerical verification of monopole fields on the round three-sphere.

pub mod bundle;
pub mod commands;
pub mod cone;
pub mod config;
pub mod error;
pub mod fd;
pub mod hartogs;
pub mod forms;
pub mod linalg;
pub mod obstruction;
pub mod potential;
pub mod regularity;
pub mod report;
pub mod rng;
pub mod sphere;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/running.md")]
    mod running {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/cone.md")]
    mod cone {}
    #[doc = include_str!("../../../book/src/fields.md")]
    mod fields {}
    #[doc = include_str!("../../../book/src/potential.md")]
    mod potential {}
    #[doc = include_str!("../../../book/src/obstruction.md")]
    mod obstruction {}
    #[doc = include_str!("../../../book/src/holonomy.md")]
    mod holonomy {}
    #[doc = include_str!("../../../book/src/regularity.md")]
    mod regularity {}
}
