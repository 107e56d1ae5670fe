//! Numerical laboratory for the one-dimensional fourth-order nonlocal
//! parabolic equation of epitaxial thin-film growth,
//!
//!   u_t + u_xxxx = |u|^{p−1}u − (1/a)∫₀ᵃ|u|^{p−1}u dx   on (0, a),
//!
//! with no-flux boundary conditions u_x = u_xxx = 0 and zero-mean initial
//! data. The crate provides:
//!
//! - [`domain`] — domain description, grid and zero-mean cosine-spectral
//!   state representations, initial-data validation;
//! - [`spectral`] — diagonal derivative operators and the dealiased
//!   nonlocal source; the semi-discrete right-hand side;
//! - [`functionals`] — energy J, Nehari functional I, Nehari scaling λ*,
//!   norms, and the trajectory identity monitors;
//! - [`integrator`] — adaptive fourth-order exponential time stepping
//!   with blow-up detection and classification of run outcomes;
//! - [`nehari`] — potential-well depth estimation, Λ_α bounds, and
//!   initial-data classification against the blow-up criteria;
//! - [`oracle`] — an independent low-order finite-difference solver and
//!   a weak-form residual checker for cross-validation;
//! - [`exec`] — parallel/sequential fan-out for batteries of runs.

pub mod domain;
pub mod error;
pub mod exec;
pub mod functionals;
pub mod integrator;
pub mod nehari;
pub mod oracle;
pub mod spectral;

pub use domain::{
    to_grid, to_spectral, validate_initial_datum, BlowUpTrigger, DomainSpec, GridField,
    OutcomeKind, RunOutcome, SpectralField,
};
pub use error::{Error, Result};
