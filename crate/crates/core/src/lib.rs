//! Estimating the separation of two incoherent point sources below the
//! Rayleigh limit by reshaping the PSF with a signum (Hilbert) filter in the
//! Fourier plane of a 4f processor.
//!
//! Modules, bottom-up:
//!
//! - [`specfun`]: Dawson's integral.
//! - [`quad`]: adaptive Gauss–Kronrod quadrature.
//! - [`psf`]: amplitude PSFs and two-source detection densities.
//! - [`processor`]: the signum-mask processor, numeric and closed form.
//! - [`fisher`]: Fisher information and Cramér–Rao bounds.
//! - [`camera`]: photon-counting camera Monte Carlo.
//! - [`estimator`]: calibration fit and separation estimator.
//! - [`cli`]: experiment configuration, CSV formats and command drivers.
//! - [`selftest`]: the acceptance checks, shared by the test suite and the CLI.
//!
//! Lengths are in units of the PSF width σ throughout the library; physical
//! units appear only in [`cli`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod camera;
pub mod cli;
pub mod error;
pub mod estimator;
pub mod fisher;
pub mod processor;
pub mod psf;
pub mod quad;
pub mod selftest;
pub mod specfun;

pub use error::{Error, Result};
