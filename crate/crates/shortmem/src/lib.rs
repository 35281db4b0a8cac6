//! Simulation and exact-computation laboratory for short-memory linear
//! processes.
//!
//! The crate builds linear processes `X_k = sum_j a_j xi_{k-j}` from seedable
//! innovation streams, measures how closely their partial-sum paths couple to
//! the innovation partial sums (and to a grid Brownian motion), computes
//! exact second moments for Gaussian models, and carries the martingale /
//! coboundary machinery used to analyse weighted partial sums.
//!
//! Core math is generic over the scalar type via [`scalar::Real`]
//! (`f32` / `f64`); concrete aliases live at the crate root.

pub mod coefficients;
pub mod error;
pub mod harness;
pub mod innovations;
pub mod numeric;
pub mod process;
pub mod projection;
pub mod rng;
pub mod scalar;
pub mod variance;
pub mod weights;

pub use error::{Error, Result};
pub use scalar::Real;

/// Concrete aliases for the common double-precision instantiation.
pub type Coefficients64 = coefficients::CoefficientSequence<f64>;
pub type Blocks64 = coefficients::StaircaseBlocks<f64>;
pub type Model64 = innovations::InnovationModel<f64>;
pub type Grid64 = innovations::BrownianGrid<f64>;
pub type Path64 = process::ProcessPath<f64>;
pub type Profile64 = variance::VarianceProfile<f64>;
pub type Ensemble64 = harness::PathEnsemble<f64>;
pub type Weight64 = weights::WeightFn<f64>;

/// Single-precision aliases; useful for quick sweeps where exactness
/// tolerances do not apply.
pub type Coefficients32 = coefficients::CoefficientSequence<f32>;
pub type Blocks32 = coefficients::StaircaseBlocks<f32>;
pub type Model32 = innovations::InnovationModel<f32>;
pub type Grid32 = innovations::BrownianGrid<f32>;
pub type Path32 = process::ProcessPath<f32>;
pub type Profile32 = variance::VarianceProfile<f32>;
pub type Weight32 = weights::WeightFn<f32>;
