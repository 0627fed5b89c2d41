//! Error type shared by all modules.

use thiserror::Error;

/// Failures surfaced by the library. Guard variants correspond to a priori
/// bounds that a well-posed computation is proved never to hit; reaching one
/// signals parameter misuse rather than a numerical accident.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Input curve failed validation.
    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    /// Curve with zero total length cannot be reparametrized.
    #[error("constant curve")]
    ConstantCurve,

    /// A curve-surgery precondition failed at a specific sample.
    #[error("curve move precondition failed at sample {index}: {reason}")]
    MovePrecondition { index: usize, reason: String },

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Root scan exhausted its range without bracketing a sign change.
    #[error("no root bracketed: {0}")]
    NoBracket(String),

    /// Test function rejected by the Rayleigh quotient.
    #[error("rayleigh quotient: {0}")]
    BadTestFunction(String),

    /// Euler-Lagrange residuals require an (approximately) constant-speed curve.
    #[error("curve is not constant-speed: chord spread {spread:.3e} exceeds {limit:.3e}")]
    NotConstantSpeed { spread: f64, limit: f64 },

    /// Trajectory left the right half-plane (F reached zero).
    #[error("left half-plane: F = {f:.6e} at t = {t:.6e}")]
    LeftHalfPlane { t: f64, f: f64 },

    /// The phase invariant lambda v^2 + v'^2 collapsed.
    #[error("degenerate phase: lambda*v^2 + v'^2 = {value:.3e} at t = {t:.6e}")]
    DegeneratePhase { t: f64, value: f64 },

    /// Integration horizon cap reached before v crossed zero.
    #[error("no zero before bound: t = {t:.6e} exceeded cap {cap:.6e} with v = {v:.3e}")]
    NoZeroBeforeBound { t: f64, cap: f64, v: f64 },

    /// Generic ODE integration failure (step-count blowup, event polish stall).
    #[error("integration failed: {0}")]
    Integration(String),

    /// Point outside the shooting-parameter disc U.
    #[error("out of domain: |(x,y)| = {radius:.6e} not below {limit:.6e}")]
    OutOfDomain { radius: f64, limit: f64 },

    /// Newton inversion of the endpoint map failed.
    #[error("inversion failed after {iterations} iterations: {reason}; residual history {history:?}")]
    InversionFailed {
        iterations: usize,
        reason: String,
        history: Vec<f64>,
    },
}
