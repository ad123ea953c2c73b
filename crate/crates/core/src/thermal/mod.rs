//! Ground-truth thermal simulation.
//!
//! Two physical systems live here: the self-heating thermo-resistor used as
//! the proof-of-concept regression target, and the multi-room building model
//! whose hourly heater consumption the surrogates learn. Both are pure
//! functions over immutable inputs and safe to evaluate from many threads.

mod building;
mod resistor;

pub use building::{
    simulate_horizon, simulate_hour, simulate_hour_detailed, BuildingModel, HourResult,
    RoomEnergyBalance, RoomParams, RoomState,
};
pub use resistor::{resistor_equilibrium, sweep_resistor, ResistorEquilibrium, ResistorParams};

use crate::{Classify, FailureKind};
use thiserror::Error;

/// Errors from the thermal simulators.
#[derive(Debug, Error)]
pub enum ThermalError {
    /// Parameter set violates its invariants (non-positive resistance, …).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    /// The equilibrium solver ran out of iterations.
    #[error("solver failed to converge after {iterations} iterations (residual {residual:.3e})")]
    SolverFailure { iterations: usize, residual: f64 },
    /// A sweep element failed; carries the offending index.
    #[error("sweep element {index} failed: {source}")]
    SweepElement {
        index: usize,
        #[source]
        source: Box<ThermalError>,
    },
    /// Mismatched input lengths (setpoints vs rooms, schedule vs series, …).
    #[error("input mismatch: {0}")]
    InputMismatch(String),
    /// Integration produced a non-finite state; the timestep is too large.
    #[error("numerical blow-up in room {room} at step {step}: temperature {value}")]
    NumericalBlowup { room: usize, step: usize, value: f64 },
}

impl Classify for ThermalError {
    fn kind(&self) -> FailureKind {
        match self {
            ThermalError::InvalidParams(_) | ThermalError::InputMismatch(_) => FailureKind::Input,
            ThermalError::SolverFailure { .. } | ThermalError::NumericalBlowup { .. } => {
                FailureKind::Numerical
            }
            ThermalError::SweepElement { source, .. } => source.kind(),
        }
    }
}
