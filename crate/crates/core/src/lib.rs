//! Surrogate-assisted demand response for building HVAC.
//!
//! The pipeline in this crate replaces an expensive building simulator with a
//! cheap learned stand-in, then uses that stand-in to steer hourly room
//! setpoints so the building's consumption tracks local PV production:
//!
//! * [`thermal`] — the ground-truth simulator: a self-heating thermo-resistor
//!   proof of concept and a multi-room building model with hysteresis
//!   thermostats.
//! * [`gp`] — noise-free Gaussian-process regression with an RBF kernel over
//!   standardized inputs and outputs.
//! * [`learner`] — the active-learning loop: initial design, max-uncertainty
//!   acquisition, and the dense prediction table it produces.
//! * [`committee`] — a lazily-built family of surrogate tables keyed on
//!   0.5 °C external-temperature buckets.
//! * [`controller`] — the hourly exploitation policy: PV-tracking candidate
//!   filter, coldest-room priority, night floor, morning preheat.
//! * [`metrics`] — self-consumption / self-sufficiency accounting and
//!   controlled-vs-baseline comparison.
//! * [`scenario`] — end-to-end orchestration over weather and PV series,
//!   with CSV report emission.
//! * [`config`] — the plain-text configuration file shared by the building,
//!   the policy and the learner.

pub mod committee;
pub mod config;
pub mod controller;
pub mod gp;
pub mod learner;
pub mod metrics;
pub mod scenario;
pub mod thermal;

/// Coarse failure classes used to map library errors onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    /// Bad user input: malformed config, inconsistent data, missing arguments.
    Input,
    /// Numerical or convergence failure inside a solver or regression.
    Numerical,
    /// Filesystem / IO failure.
    Io,
}

/// Implemented by every error type in this crate so callers can map failures
/// onto coarse classes without matching each variant.
pub trait Classify {
    fn kind(&self) -> FailureKind;
}
