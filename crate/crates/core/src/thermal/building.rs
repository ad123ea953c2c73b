//! Multi-room building model with hysteresis thermostats.
//!
//! Each room is a lumped air volume. Per timestep the indoor temperature
//! follows the sensible-heat balance
//!
//! ```text
//! m·c_v·dT/dt = P_heat·on − UA·(T_in − T_ext) − mdot·c_v·(T_in − T_ext)
//! ```
//!
//! integrated with explicit Euler. The heater is a simple on/off thermostat
//! with a symmetric dead band: on below `setpoint − delta`, off above
//! `setpoint + delta`, state retained in between and across hours. No
//! mechanical work is exchanged (isochoric process), so heater energy either
//! raises the air temperature or leaves through the envelope and ventilation.

use super::ThermalError;

const KWH_PER_JOULE: f64 = 1.0 / 3.6e6;

/// Physical constants of one room.
#[derive(Debug, Clone, PartialEq)]
pub struct RoomParams {
    /// Mass of the air volume [kg].
    pub air_mass_kg: f64,
    /// Isochoric specific heat capacity of the air [J/(kg·K)].
    pub c_v_j_per_kg_k: f64,
    /// Aggregated envelope conductance h_c·A [W/K].
    pub ua_w_per_k: f64,
    /// Ventilation mass flow exchanging air with the outdoors [kg/s].
    pub vent_mass_flow_kg_per_s: f64,
    /// Electrical (= thermal, COP 1) heater power [W].
    pub heater_power_w: f64,
    /// Half-width of the thermostat dead band [K].
    pub hysteresis_k: f64,
}

impl RoomParams {
    pub fn validate(&self) -> Result<(), ThermalError> {
        let positive = [
            ("air_mass_kg", self.air_mass_kg),
            ("c_v_j_per_kg_k", self.c_v_j_per_kg_k),
            ("ua_w_per_k", self.ua_w_per_k),
            ("heater_power_w", self.heater_power_w),
        ];
        for (name, value) in positive {
            if !(value > 0.0) {
                return Err(ThermalError::InvalidParams(format!(
                    "{name} must be > 0, got {value}"
                )));
            }
        }
        if !(self.vent_mass_flow_kg_per_s >= 0.0) {
            return Err(ThermalError::InvalidParams(format!(
                "vent_mass_flow_kg_per_s must be >= 0, got {}",
                self.vent_mass_flow_kg_per_s
            )));
        }
        if !(self.hysteresis_k > 0.0 && self.hysteresis_k <= 2.0) {
            return Err(ThermalError::InvalidParams(format!(
                "hysteresis_k must be in (0, 2], got {}",
                self.hysteresis_k
            )));
        }
        Ok(())
    }

    /// Heat capacity of the room air [J/K].
    pub fn heat_capacity_j_per_k(&self) -> f64 {
        self.air_mass_kg * self.c_v_j_per_kg_k
    }
}

/// Ordered set of rooms; the ordering indexes every setpoint vector.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildingModel {
    pub rooms: Vec<RoomParams>,
}

impl BuildingModel {
    pub fn new(rooms: Vec<RoomParams>) -> Result<Self, ThermalError> {
        if rooms.is_empty() {
            return Err(ThermalError::InvalidParams(
                "building must have at least one room".into(),
            ));
        }
        for room in &rooms {
            room.validate()?;
        }
        Ok(Self { rooms })
    }

    pub fn room_count(&self) -> usize {
        self.rooms.len()
    }

    /// Sum of heater powers [W]; upper bound for any hourly consumption.
    pub fn total_heater_power_w(&self) -> f64 {
        self.rooms.iter().map(|r| r.heater_power_w).sum()
    }
}

/// Per-room indoor temperatures and heater relay states.
#[derive(Debug, Clone, PartialEq)]
pub struct RoomState {
    /// Indoor temperature per room [°C].
    pub temperatures_c: Vec<f64>,
    /// Heater relay state per room.
    pub heater_on: Vec<bool>,
}

impl RoomState {
    /// All rooms at the same temperature with heaters off.
    pub fn uniform(building: &BuildingModel, temperature_c: f64) -> Self {
        Self {
            temperatures_c: vec![temperature_c; building.room_count()],
            heater_on: vec![false; building.room_count()],
        }
    }

    /// One temperature per room, heaters off.
    pub fn from_temperatures(temperatures_c: Vec<f64>) -> Self {
        let heater_on = vec![false; temperatures_c.len()];
        Self {
            temperatures_c,
            heater_on,
        }
    }
}

/// Outcome of one simulated hour.
#[derive(Debug, Clone, PartialEq)]
pub struct HourResult {
    /// Electrical energy consumed by all heaters over the hour [kWh].
    pub energy_kwh: f64,
    /// Room state at the end of the hour.
    pub final_state: RoomState,
}

/// Per-room energy bookkeeping over one hour, all in joules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoomEnergyBalance {
    pub heater_j: f64,
    pub envelope_loss_j: f64,
    pub ventilation_j: f64,
    pub temp_start_c: f64,
    pub temp_end_c: f64,
}

fn check_hour_inputs(
    building: &BuildingModel,
    setpoints_c: &[f64],
    start: &RoomState,
    timestep_s: u32,
) -> Result<(), ThermalError> {
    if setpoints_c.len() != building.room_count() {
        return Err(ThermalError::InputMismatch(format!(
            "{} setpoints for {} rooms",
            setpoints_c.len(),
            building.room_count()
        )));
    }
    if start.temperatures_c.len() != building.room_count()
        || start.heater_on.len() != building.room_count()
    {
        return Err(ThermalError::InputMismatch(format!(
            "state holds {} rooms, building has {}",
            start.temperatures_c.len(),
            building.room_count()
        )));
    }
    if timestep_s == 0 || 3600 % timestep_s != 0 {
        return Err(ThermalError::InputMismatch(format!(
            "timestep {timestep_s} s must divide 3600"
        )));
    }
    Ok(())
}

/// Simulates one hour and returns the per-room energy bookkeeping alongside.
pub fn simulate_hour_detailed(
    building: &BuildingModel,
    setpoints_c: &[f64],
    external_temp_c: f64,
    start: &RoomState,
    timestep_s: u32,
) -> Result<(HourResult, Vec<RoomEnergyBalance>), ThermalError> {
    check_hour_inputs(building, setpoints_c, start, timestep_s)?;

    let steps = (3600 / timestep_s) as usize;
    let dt = f64::from(timestep_s);
    let mut state = start.clone();
    let mut balances: Vec<RoomEnergyBalance> = start
        .temperatures_c
        .iter()
        .map(|&t| RoomEnergyBalance {
            heater_j: 0.0,
            envelope_loss_j: 0.0,
            ventilation_j: 0.0,
            temp_start_c: t,
            temp_end_c: t,
        })
        .collect();

    for step in 0..steps {
        for (room_idx, room) in building.rooms.iter().enumerate() {
            let temp = state.temperatures_c[room_idx];
            let setpoint = setpoints_c[room_idx];

            // Thermostat first, using the temperature entering the step.
            if temp < setpoint - room.hysteresis_k {
                state.heater_on[room_idx] = true;
            } else if temp > setpoint + room.hysteresis_k {
                state.heater_on[room_idx] = false;
            }

            let heater_w = if state.heater_on[room_idx] {
                room.heater_power_w
            } else {
                0.0
            };
            let envelope_w = room.ua_w_per_k * (temp - external_temp_c);
            let ventilation_w =
                room.vent_mass_flow_kg_per_s * room.c_v_j_per_kg_k * (temp - external_temp_c);

            let next =
                temp + (heater_w - envelope_w - ventilation_w) * dt / room.heat_capacity_j_per_k();
            if !next.is_finite() || next.abs() > 1.0e3 {
                return Err(ThermalError::NumericalBlowup {
                    room: room_idx,
                    step,
                    value: next,
                });
            }
            state.temperatures_c[room_idx] = next;

            let b = &mut balances[room_idx];
            b.heater_j += heater_w * dt;
            b.envelope_loss_j += envelope_w * dt;
            b.ventilation_j += ventilation_w * dt;
        }
    }

    for (room_idx, b) in balances.iter_mut().enumerate() {
        b.temp_end_c = state.temperatures_c[room_idx];
    }
    let energy_kwh = balances.iter().map(|b| b.heater_j).sum::<f64>() * KWH_PER_JOULE;
    Ok((HourResult { energy_kwh, final_state: state }, balances))
}

/// Simulates one hour of thermostat-controlled heating.
pub fn simulate_hour(
    building: &BuildingModel,
    setpoints_c: &[f64],
    external_temp_c: f64,
    start: &RoomState,
    timestep_s: u32,
) -> Result<HourResult, ThermalError> {
    simulate_hour_detailed(building, setpoints_c, external_temp_c, start, timestep_s)
        .map(|(result, _)| result)
}

/// Chains [`simulate_hour`] over a schedule, carrying the room state across
/// hours. `schedule[h]` holds the per-room setpoints for hour `h`.
pub fn simulate_horizon(
    building: &BuildingModel,
    setpoint_schedule: &[Vec<f64>],
    external_series_c: &[f64],
    start: &RoomState,
    timestep_s: u32,
) -> Result<Vec<HourResult>, ThermalError> {
    if setpoint_schedule.len() != external_series_c.len() {
        return Err(ThermalError::InputMismatch(format!(
            "schedule has {} hours, external series has {}",
            setpoint_schedule.len(),
            external_series_c.len()
        )));
    }
    let mut results = Vec::with_capacity(setpoint_schedule.len());
    let mut state = start.clone();
    for (setpoints, &t_ext) in setpoint_schedule.iter().zip(external_series_c) {
        let hour = simulate_hour(building, setpoints, t_ext, &state, timestep_s)?;
        state = hour.final_state.clone();
        results.push(hour);
    }
    Ok(results)
}
