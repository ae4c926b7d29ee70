//! Estimation of an environment's memory time with a dynamically
//! controlled dephasing probe.
//!
//! The probe coherence decays as `exp(-J)` with `J` the overlap of a
//! control-dependent filter function and the environment's noise spectrum.
//! This crate provides the generalized Ornstein-Uhlenbeck spectrum family
//! ([`spectral`]), filter functions for free evolution, pulse sequences and
//! narrowband control ([`filters`]), the attenuation integrals
//! ([`attenuation`](mod@attenuation)), Fisher-information and criticality
//! scans ([`estimation`]), and a finite-shot Monte-Carlo validation layer
//! ([`montecarlo`]).

pub mod attenuation;
pub mod error;
pub mod estimation;
pub mod filters;
pub mod montecarlo;
pub mod quad;
mod search;
pub mod spectral;

pub use attenuation::{attenuation, probabilities, AttenuationMethod, ProbeResult};
pub use error::{Error, Result};
pub use estimation::{
    critical_scan, error_point, error_vs_control_scan, optimal_time, qfi, relative_error,
    strategy_select, ultimate_bound, Branch, ControlFamily, CriticalScanRow, ErrorPoint,
    OptimalTime, StrategyChoice,
};
pub use filters::{ControlFilter, FilterKind};
pub use montecarlo::{crb_check, mle_tau, simulate, CrbCheck, MeasurementRecord, Protocol};
pub use spectral::NoiseSpectrum;
