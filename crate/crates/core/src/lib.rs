//! Noncommutative differential forms with Karoubi-operator Hodge theory,
//! ζ-regularized determinants and torsion of finite complexes, and the
//! tangential Witten deformation on discretized product foliations.

pub mod algebra;
pub mod checks;
pub mod error;
pub mod forms;
pub mod hodge;
pub mod linalg;
pub mod poly;
pub mod report;
pub mod scalar;
pub mod selftest;
pub mod spectral;
pub mod tangential;

pub use error::{Error, Result};
pub use scalar::{GaussianRational, Scalar, ScalarMode};
