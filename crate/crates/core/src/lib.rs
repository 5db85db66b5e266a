//! Simulation pipeline for a single fluxonium artificial atom driven as a
//! three-level Λ system in a one-dimensional waveguide.
//!
//! The crate is organised bottom-up:
//!
//! * [`fluxonium`]: circuit Hamiltonian in a truncated oscillator basis,
//!   transition frequencies, charge matrix elements, flux sweeps.
//! * [`lindblad`]: rotating-frame Λ Hamiltonian, Liouvillian superoperator,
//!   steady state and fixed-step time evolution.
//! * [`scattering`]: waveguide transmission from the probe coherence, EIT
//!   spectra, control-power maps, group delay and the EIT/ATS threshold.
//! * [`pulse`]: Gaussian probe propagation, delay extraction, storage and
//!   retrieval with efficiency metrics.
//! * [`selection`]: EIT and ATS line-shape fits, AIC scores and weights,
//!   synthetic datasets and the crossover search.
//! * [`config`]: run configuration with the canonical parameter profile.
//!
//! Public inputs are linear frequencies (GHz for circuit energies, MHz for
//! rates and Rabi amplitudes) and times in µs. Internally the master
//! equation works in angular units (rad/µs); see [`units`].

// `!(x > 0.0)` guards are written that way so NaN fails them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod fluxonium;
pub mod lindblad;
pub mod pulse;
pub mod scattering;
pub mod selection;
pub mod units;

pub use error::{Error, Result};
pub use fluxonium::{FluxoniumParams, SpectrumResult};
pub use lindblad::{
    DensityMatrix3, DriveParams, DriveSchedule, LambdaParams, Liouvillian, TimeGrid, Trajectory,
};
pub use pulse::{PulseRecord, PulseSpec, StorageSchedule};
pub use scattering::{DelayCurve, PowerCalibration, TransmissionPoint};
pub use selection::{FitOutcome, LineShapeData, ModelKind};
pub use config::{ConfigError, RunConfig};

/// Complex scalar used throughout the open-system code.
pub type C64 = nalgebra::Complex<f64>;
