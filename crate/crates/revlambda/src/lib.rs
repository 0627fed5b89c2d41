//! Spectral geometry of surfaces of revolution with Dirichlet boundary circles.
//!
//! A surface of revolution spanning two parallel circles is described by its
//! profile curve `(F, G)` in the open right half-plane. Its first Dirichlet
//! eigenvalue reduces to a weighted Sturm-Liouville problem on the curve
//! parameter, which this crate discretizes with P1 finite elements. On top of
//! that solver sit two independent constructions of the eigenvalue-maximizing
//! profile between fixed boundary points:
//!
//! * direct ascent over discretized curves ([`maximizer`]), using
//!   finite-difference shape gradients plus the circle-inversion and chord
//!   improvement moves, and
//! * shooting on the critical-surface initial value problem
//!   ([`critical_ode`], [`shooting`]), inverting the endpoint map by damped
//!   Newton iteration.
//!
//! Closed-form Bessel spectra for the flat disc and concentric annulus
//! ([`reference_spectra`]) provide the comparison baselines and a priori
//! bounds used throughout.

pub mod critical_ode;
pub mod error;
pub mod geometry;
pub mod maximizer;
pub mod reference_spectra;
mod rk;
pub mod shooting;
pub mod spectral;

pub use error::Error;
pub use geometry::{CircleSpec, HalfPlanePoint, ProfileCurve};
pub use spectral::SpectralResult;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
