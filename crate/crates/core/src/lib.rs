//! Numerical laboratory for the KdV shock problem with step-like initial
//! data: forward scattering, the analytic splitting of the reflection
//! coefficient, Riemann–Hilbert jump matrices, the soliton model problem
//! and an independent pseudo-spectral KdV integrator.

pub mod cli;
pub mod config;
pub mod error;
pub mod field;
pub mod fit;
pub mod io;
pub mod kdv_oracle;
pub mod model;
pub mod ode;
pub mod potentials;
pub mod reflsplit;
pub mod rhp;
pub mod scattering;

pub use error::{Error, Result};
