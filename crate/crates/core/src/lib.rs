//! Wavelet-based spectral density estimation for processes with stationary
//! increments observed at irregular times.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod error;
pub mod estimator;
pub mod harness;
pub mod pathgen;
pub mod quad;
pub mod quadvar;
pub mod rng;
pub mod spectral;
pub mod wavelet;

pub use error::{Error, Result};
pub use estimator::{estimate_density, DensityEstimate, EstimatorConfig};
pub use pathgen::{SampledPath, SamplingScheme};
pub use spectral::{ModelSpec, SpectralModel};
pub use wavelet::{ModulatedWavelet, MotherWavelet, WaveletShape};
