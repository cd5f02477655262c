//! Numerical toolkit for two-phase free boundary problems of EHD type with
//! gravity: exact homogeneous blowup profiles, discrete scalar fields with
//! quadrature and level-set extraction, the EHD energy functional and its
//! first variation, Weiss-type and frequency monotonicity diagnostics,
//! corner amplitude systems, a smoothed-continuation energy minimizer and
//! stagnation-point classification.
//!
//! The state function `u` is positive in the gas phase, negative in the
//! fluid phase, and the datum height `x2_0` is where the gravity weights
//! change sign. Everything downstream (energies, densities, frequencies,
//! classification bands) is expressed in these terms.

pub mod blowup;
pub mod corner;
pub mod energy;
pub mod field;
pub mod frequency;
pub mod geom;
pub mod minimize;
pub mod profiles;
pub mod report;
pub mod weiss;

use thiserror::Error;

/// Crate-wide error type; operations that can fail return `Result<T>`.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point or region leaves the lattice hull: {0}")]
    OutOfDomain(String),
    #[error("evaluation on a sector ray or at the origin: {0}")]
    OnBoundary(String),
    #[error("free boundary conditions require homogeneity degree 3/2, got {0}")]
    UnsupportedExponent(f64),
    #[error("exponent {0} outside the admissible range ({1}, {2})")]
    InvalidExponent(f64, f64, f64),
    #[error("field has positive-part mass {0:.3e}, not a one-phase candidate")]
    NotOnePhase(f64),
    #[error("trace integral {0:.3e} below the degeneracy floor {1:.3e}")]
    DegenerateTrace(f64, f64),
    #[error("polyline branch has only {0} vertices in the fit window (need >= 4)")]
    InsufficientArc(usize),
    #[error("descent diverged at outer iteration {iteration}")]
    Diverged { iteration: usize, history: Vec<f64> },
    #[error("non-finite value encountered during minimization")]
    NumericalFailure,
    #[error("inner Dirichlet solver did not reach tolerance {0:.3e}")]
    InnerSolverFailed(f64),
    #[error("no roots found for the corner system")]
    NoSolution,
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
