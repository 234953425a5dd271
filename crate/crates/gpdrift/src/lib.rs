//! Maximum-likelihood drift estimation for Gaussian-process regression
//! `X_t = theta * G(t) + B_t` under discrete and continuous observation,
//! for Wiener, fractional, sub-fractional, mixed, and two-fBm noise.
//!
//! The crate is organized bottom-up:
//! - [`kernels`]: covariance functions, increment covariance matrices,
//!   kernel densities;
//! - [`simulate`]: exact Cholesky path simulation and conditional grid
//!   refinement with deterministic seeded streams;
//! - [`fraccalc`]: Riemann-Liouville fractional operators, covariance
//!   operators, and the power-kernel inversion;
//! - [`weights`]: the continuous-MLE weight functions `h_T` per model;
//! - [`estimators`]: the discrete and continuous MLEs and their variances.

pub mod error;
pub mod estimators;
pub mod fraccalc;
pub mod grid;
pub mod kernels;
pub mod linalg;
pub mod rng;
pub mod simulate;
pub mod stats;
pub mod weights;

pub use error::{Error, Result};
pub use estimators::{EstimateResult, Scheme};
pub use grid::{GridFunction, QuadGrid, SingularityFlags, TimeGrid};
pub use kernels::{IncrementCovariance, NoiseModel};
pub use simulate::{DriftSpec, PathSampler, RefinePlan, SamplePath};
pub use weights::{WeightFunction, WeightMethod};
