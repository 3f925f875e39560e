//! Error type shared by every numerical routine in the crate.

use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integrator failed at x = {x}: {reason}")]
    Integrator { x: f64, reason: String },

    #[error("non-finite value encountered at x = {x} (lambda = {lambda})")]
    NonFinite { x: f64, lambda: Complex64 },

    /// Stable/unstable splitting lost its dimension count at this lambda.
    #[error("degenerate spectrum at lambda = {lambda}: eigenvalue gap {gap:e} below splitting tolerance {tol:e}")]
    DegenerateSpectrum { lambda: Complex64, gap: f64, tol: f64 },

    #[error("fixed-point iteration did not contract at lambda = {lambda} after {iterations} iterations (last step {last_step:e})")]
    NonContraction {
        lambda: Complex64,
        iterations: usize,
        last_step: f64,
    },

    /// Consecutive continued eigenvectors turned by more than a right angle.
    #[error("branch flip between contour samples {index} and {} (lambda = {lambda})", index + 1)]
    BranchFlip { index: usize, lambda: Complex64 },

    #[error("value within {tol:e} of the origin at sample {index}")]
    ZeroOnContour { index: usize, tol: f64 },

    #[error("phase increment {max_increment:.4} rad reaches pi/2; contour needs refinement")]
    InsufficientSampling { max_increment: f64 },

    #[error("threshold {threshold} not bracketed on [{lo:e}, {hi:e}] (values {f_lo}, {f_hi})")]
    Bracket {
        threshold: f64,
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("relative error is not monotone in v_plus near {v_plus:e}")]
    NonMonotone { v_plus: f64 },

    /// Failures collected over a contour, keyed by sample index.
    #[error("{} contour sample(s) failed; first at index {}: {}", failures.len(), failures[0].0, failures[0].1)]
    Contour { failures: Vec<(usize, Box<Error>)> },
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
