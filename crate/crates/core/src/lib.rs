//! Tau functions of matrix Riemann-Hilbert problems computed as Fredholm
//! determinants of block integrable operators, together with their
//! combinatorial series over colored charged partitions.

pub mod error;
pub mod linalg;
pub mod fredholm;
pub mod loops;
pub mod multicircle;
pub mod parametrix;
pub mod plemelj;
pub mod toeplitz;

pub use error::{Result, TauError};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use linalg::{CMat, C64};
pub use loops::{Annulus, Circle, LoopConfig, MatrixLoop, Side};
pub use toeplitz::{build_toeplitz, toeplitz_det, widom_sequence, BlockToeplitz, WidomSequence};
pub use plemelj::{
    cauchy_modes, kernel_modes, kernel_value, modes_below, solve_dual, widom_derivative, DualFactorization,
    FactorizationPair, KernelSide, ModeBlock, RankOneData, RankOneSide,
};
pub use fredholm::{
    assemble_l, bo_gap, correlation_kernel, enumerate_configurations, maya_to_partition, minor_z,
    partition_to_maya, plucker_minor, series_tau, tau_determinant, ChargedPartition, ColoredConfiguration,
    HalfInt, MayaDiagram, Sign, TauMethod, TauResult,
};
pub use parametrix::{fuchsian_3pt, gd_jump, hyp2f1, pvi_jump, schur_modes, FuchsianSpec, GDSpec, ThreePointSpec};
pub use multicircle::{assemble_jump_form_l, assemble_multicircle_l, build_contour, tau_multicircle, transfer_block, CircleContour, Face, JumpAssignment};
