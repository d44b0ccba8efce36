//! Leafwise Hodge theory on discretized product foliations: tangential
//! Betti numbers weighted by a transverse measure, the Witten deformation
//! and its τ-invariance, tangential Morse singularities, and the
//! Godbillon–Vey integral of a codimension-one plane field on `T³`.

pub mod gv;
pub mod model;
pub mod morse;
pub mod witten;

pub use gv::{godbillon_vey, GvReport, OmegaSpec};
pub use model::{make_model, FoliationModel, LeafSpec, ModelFile, PhiSpec};
pub use morse::{morse_scan, MorseFunction, MorseScanReport, ScanGrid};
pub use witten::{tangential_betti, witten_betti_sweep, witten_complex, WittenSweepReport};
