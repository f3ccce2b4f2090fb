//! Builders of factorization pairs from special functions.

pub mod fuchsian;
pub mod gd;
pub mod hyp2f1;

pub use fuchsian::{fuchsian_3pt, fuchsian_value, mid_residue, pvi_jump, FuchsianSpec, ThreePointSpec};
pub use gd::{companion, gd_jump, schur_modes, schur_polynomials, GDSpec};
pub use hyp2f1::{gamma, hyp2f1, ln_gamma, rgamma};
