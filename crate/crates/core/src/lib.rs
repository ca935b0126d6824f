//! Periodic-box Navier-Stokes laboratory for vorticity sparseness diagnostics.
//!
//! The crate is organized bottom-up:
//!
//! * [`grid`], [`field`], [`fft`], [`operators`] and [`snapshot`] hold the
//!   periodic fields, spectral transforms, curl/Biot-Savart and norms;
//! * [`solver`] integrates the incompressible Navier-Stokes equations;
//! * [`sparseness`] extracts vorticity super-level sets and measures their
//!   1D/3D sparseness;
//! * [`bounds`] evaluates H^-1 norms, mixing-lemma constants and the
//!   harmonic-measure constants;
//! * [`scaling`] turns time series into escape times and power-law fits.

pub mod bounds;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod operators;
pub mod snapshot;
pub mod scaling;
pub mod solver;
pub mod sparseness;

pub use error::{Error, Result};
pub use field::{ScalarField, SpectralVectorField, VectorField};
pub use grid::Grid;
