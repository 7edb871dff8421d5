//! Bayesian wavelet shrinkage with an area-interaction prior on the
//! coefficient lattice.
//!
//! A noisy dyadic signal is transformed with a periodized orthogonal DWT.
//! The detail coefficients get a Gaussian prior whose variance scales with
//! the number of points of a clustered lattice point process at their site;
//! that process is sampled exactly from its posterior by dominated coupling
//! from the past, and the coefficients are estimated by the per-site median
//! of conditional draws. Comparator thresholding rules and an experiment
//! harness are included.

// Validation is written as `!(x > 0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod bench;
pub mod cftp;
pub mod error;
pub mod estimator;
pub mod lattice;
pub mod model;
pub mod rng;
pub mod scalar;
pub mod wavelet;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Signal = wavelet::Signal<f64>;
pub type SignalF32 = wavelet::Signal<f32>;
pub type WaveletFilter = wavelet::WaveletFilter<f64>;
pub type WaveletFilterF32 = wavelet::WaveletFilter<f32>;
pub type Decomposition = wavelet::WaveletDecomposition<f64>;
pub type DecompositionF32 = wavelet::WaveletDecomposition<f32>;
pub type ModelParams = model::ModelParams<f64>;
pub type ModelParamsF32 = model::ModelParams<f32>;
