//! Testing discretely observed price paths for jumps by looking for clusters
//! in their increments.
//!
//! The central object is the empirical cross-over function (ECF) of the
//! sorted increments. Its last zero crossing gives an empirical split point
//! `p_n`; under a continuous (Brownian) path `p_n` concentrates at 0.5 with a
//! Gaussian limit, while a jump component pushes it towards the boundary.
//! [`ecf::jump_test`] standardizes `p_n - 0.5` with a plug-in variance
//! estimate and decides between "no jumps" and "jumps".
//!
//! Around that core the crate provides:
//!
//! - [`theory`]: population versions of the cross-over function for normal
//!   laws and two-component normal mixtures, used as ground truth.
//! - [`sim`]: exact-in-distribution simulation of jump-diffusion increments.
//! - [`st`]: the power-variation ratio test used as a comparison baseline.
//! - [`experiments`]: a reproducible parallel Monte Carlo harness for level
//!   and power studies.
//! - [`io`]: CSV ingestion of price series, run configuration, and report
//!   serialization.

pub mod ecf;
pub mod error;
pub mod experiments;
pub mod io;
pub mod ks;
pub mod quad;
pub mod rng;
pub mod sim;
pub mod st;
pub mod summation;
pub mod theory;

pub use ecf::{
    compute_ecf, jump_test, jump_test_with, make_increments, quantile_slope, split_point,
    variance_components, Boundary, Decision, EcfCurve, IncrementSample, JumpTestResult,
    SlopeEstimator, SplitPointEstimate, TestOptions, VarianceComponents,
};
pub use error::{Error, Result};
pub use sim::{simulate_path, JumpSpec, ModelSpec, PathSample, SizeLaw};
pub use st::{st_test, StTestResult};
