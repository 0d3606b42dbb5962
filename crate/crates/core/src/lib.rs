//! Single-excitation dynamics of a quantum dot and a V-type atom coupled to
//! the two counter-propagating modes of a ring cavity, the cavity dark state
//! they share, and estimation of that state's entanglement from photon
//! directionality counts.
//!
//! Rates are in units of the cavity field decay `kappa` unless a
//! [`SystemParams`] is built with an explicit `kappa`.
//!
//! ```
//! use cds_core::{cesium_ratio, concurrence_vs_directionality, peak_directionality};
//!
//! let r_a = cesium_ratio();
//! let c = concurrence_vs_directionality(peak_directionality(r_a), r_a).unwrap();
//! assert!((c - 1.0).abs() < 1e-12);
//! ```

pub mod config;
pub mod dynamics;
pub mod error;
pub mod inference;
pub mod io;
pub mod model;
pub mod observables;
pub mod sweeps;

pub use dynamics::{
    closed_form_cavity, full_rhs, integrate_full, reduced_propagate, AmplitudeState,
    EmitterAmplitudes, StepControl, Stepping, Trajectory,
};
pub use error::{Error, Result};
pub use inference::{
    error_scaling_study, estimate_concurrence, estimate_from_record, interval_coverage,
    sample_outcomes, ConcurrenceEstimate, MeasurementRecord, ScalingResult,
};
pub use model::{cesium_ratio, check_regime, derive_effective_rates, SystemParams};
pub use observables::{
    concurrence_from_couplings, concurrence_from_ratios, concurrence_of_state,
    concurrence_vs_directionality, dark_state, directionality, emission_probabilities_analytic,
    max_directionality, peak_directionality, peak_ratio, EmissionProbabilities,
};
