//! Driven three-level Λ system: rotating-frame Hamiltonian, Lindblad
//! generator, steady state and time evolution.
//!
//! Inputs are linear frequencies (MHz); the generator is built in rad/µs.
//! The probe coherence that radiates into the waveguide is
//! `ρ_20 = ⟨σ_02⟩`, see [`crate::scattering`].

mod density;
mod evolve;
mod liouvillian;
mod params;
mod steady;

pub use density::{vec_index, DensityMatrix3, Matrix3c, Vec9};
pub use evolve::{evolve, evolve_with_step, DriveSchedule, Envelope, TimeGrid, Trajectory};
pub use liouvillian::{channels, lambda_hamiltonian, sigma, Liouvillian, Superop};
pub use params::{DriveParams, LambdaParams};
pub use steady::{null_space_dim, steady_state};

use crate::error::Result;

/// Steady state for constant drive.
pub fn steady_state_for(params: &LambdaParams, drive: &DriveParams) -> Result<DensityMatrix3> {
    params.validate()?;
    drive.validate()?;
    steady_state(&Liouvillian::build(params, drive))
}
