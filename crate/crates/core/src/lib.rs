//! Spectral stability of isentropic Navier–Stokes shock layers in the
//! high-Mach-number limit.
//!
//! * [`shock_model`] — Rankine–Hugoniot constant, Mach number, profiles.
//! * [`eigensystem`] — coefficient matrices and their asymptotic modes.
//! * [`evans_core`] — Evans function by adjoint shooting.
//! * [`contour_stability`] — contours, winding numbers, Rouché bounds, verdicts.

pub mod contour_stability;
pub mod eigensystem;
pub mod error;
pub mod evans_core;
pub mod linalg;
pub mod ode;
pub mod shock_model;

pub use error::{Error, Result};
pub use num_complex::Complex64;
