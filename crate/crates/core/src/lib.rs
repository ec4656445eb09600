//! Linear stability, weakly nonlinear reduction and direct simulation for the
//! one-dimensional time-dependent Ginzburg–Landau model of a wire carrying a
//! current `I`.

pub mod amplitude;
pub mod bifurcation;
pub mod collision;
pub mod config;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod parallel;
pub mod psc;
pub mod spectral;
pub mod tdgl;

pub use error::{Error, Result};
pub use grid::{BoundaryCondition, Grid, GridFunction};
pub use num_complex::Complex64;

/// Version string embedded in output manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
