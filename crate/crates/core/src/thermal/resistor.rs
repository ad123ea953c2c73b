//! Self-heating thermo-resistor at steady state.
//!
//! The resistance grows with its own temperature,
//! `R_eq = R · (1 + alpha · (T − T_ref))`, and the heatport temperature is set
//! by the dissipated power through a lumped thermal resistance to ambient,
//! `T = T_ambient + R_th · V² / R_eq(T)`. The steady state is the fixed point
//! of that scalar equation, solved by safeguarded Newton with bisection
//! fallback. Because `R_eq` increases with `T`, the dissipated power is
//! decreasing in `T` and the fixed point is unique on the bracket.

use super::ThermalError;

const MAX_ITERATIONS: usize = 200;
const RELATIVE_RESIDUAL_TOL: f64 = 1e-9;

/// Physical constants of one thermo-resistor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResistorParams {
    /// Intrinsic resistance at the reference temperature [ohm].
    pub r_ohm: f64,
    /// Temperature coefficient of resistance [1/K].
    pub alpha_per_k: f64,
    /// Reference temperature of the coefficient [K].
    pub t_ref_k: f64,
    /// Lumped thermal resistance from the heatport to ambient [K/W].
    pub r_th_k_per_w: f64,
}

impl ResistorParams {
    pub fn validate(&self) -> Result<(), ThermalError> {
        if !(self.r_ohm > 0.0) {
            return Err(ThermalError::InvalidParams(format!(
                "intrinsic resistance must be > 0, got {}",
                self.r_ohm
            )));
        }
        if !(self.r_th_k_per_w >= 0.0) {
            return Err(ThermalError::InvalidParams(format!(
                "thermal resistance must be >= 0, got {}",
                self.r_th_k_per_w
            )));
        }
        if !(self.alpha_per_k >= 0.0) {
            return Err(ThermalError::InvalidParams(format!(
                "temperature coefficient must be >= 0, got {}",
                self.alpha_per_k
            )));
        }
        Ok(())
    }

    /// Equivalent resistance at heatport temperature `t_k`.
    pub fn r_eq(&self, t_k: f64) -> f64 {
        self.r_ohm * (1.0 + self.alpha_per_k * (t_k - self.t_ref_k))
    }
}

/// Self-consistent steady state of the resistor under a DC voltage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResistorEquilibrium {
    /// Output current [A].
    pub current_a: f64,
    /// Equivalent resistance at equilibrium [ohm].
    pub r_eq_ohm: f64,
    /// Heatport temperature at equilibrium [K].
    pub heatport_temp_k: f64,
}

/// Solves the steady state for one applied voltage.
///
/// The residual of the fixed-point equation on the accepted solution is at
/// most `1e-9` relative to the temperature scale.
pub fn resistor_equilibrium(
    params: &ResistorParams,
    voltage_v: f64,
    ambient_temp_k: f64,
) -> Result<ResistorEquilibrium, ThermalError> {
    params.validate()?;
    if !(voltage_v >= 0.0) {
        return Err(ThermalError::InvalidParams(format!(
            "voltage must be >= 0, got {voltage_v}"
        )));
    }

    let r_eq_ambient = params.r_eq(ambient_temp_k);
    if r_eq_ambient <= 0.0 {
        return Err(ThermalError::InvalidParams(format!(
            "equivalent resistance non-positive at ambient ({r_eq_ambient} ohm)"
        )));
    }

    // No dissipation, or no feedback path: closed forms.
    if voltage_v == 0.0 {
        return Ok(ResistorEquilibrium {
            current_a: 0.0,
            r_eq_ohm: r_eq_ambient,
            heatport_temp_k: ambient_temp_k,
        });
    }
    if params.alpha_per_k == 0.0 || params.r_th_k_per_w == 0.0 {
        let t = ambient_temp_k + params.r_th_k_per_w * voltage_v * voltage_v / r_eq_ambient;
        let r_eq = params.r_eq(if params.r_th_k_per_w == 0.0 {
            ambient_temp_k
        } else {
            // alpha == 0 here, so r_eq is the same at any temperature.
            t
        });
        return Ok(ResistorEquilibrium {
            current_a: voltage_v / r_eq,
            r_eq_ohm: r_eq,
            heatport_temp_k: t,
        });
    }

    // g(T) = ambient + R_th · V²/R_eq(T) − T is strictly decreasing on the
    // bracket, positive at T = ambient and negative at the power bound.
    let g = |t: f64| ambient_temp_k + params.r_th_k_per_w * voltage_v * voltage_v / params.r_eq(t) - t;
    let scale = ambient_temp_k.abs().max(1.0);

    let mut lo = ambient_temp_k;
    let mut hi = ambient_temp_k + params.r_th_k_per_w * voltage_v * voltage_v / r_eq_ambient;
    if params.r_eq(hi) <= 0.0 {
        return Err(ThermalError::InvalidParams(
            "equivalent resistance becomes non-positive over the solution bracket".into(),
        ));
    }

    let mut t = 0.5 * (lo + hi);
    for iteration in 0..MAX_ITERATIONS {
        let residual = g(t);
        if residual.abs() <= RELATIVE_RESIDUAL_TOL * scale.max(t.abs()) {
            let r_eq = params.r_eq(t);
            return Ok(ResistorEquilibrium {
                current_a: voltage_v / r_eq,
                r_eq_ohm: r_eq,
                heatport_temp_k: t,
            });
        }
        if residual > 0.0 {
            lo = t;
        } else {
            hi = t;
        }

        // Newton step on g; fall back to bisection when it leaves the bracket.
        let r_eq = params.r_eq(t);
        let dg = -params.r_th_k_per_w * voltage_v * voltage_v * params.r_ohm * params.alpha_per_k
            / (r_eq * r_eq)
            - 1.0;
        let newton = t - residual / dg;
        t = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };

        if iteration == MAX_ITERATIONS - 1 {
            return Err(ThermalError::SolverFailure {
                iterations: MAX_ITERATIONS,
                residual: residual.abs() / scale,
            });
        }
    }
    unreachable!("loop either returns or errors on its last iteration")
}

/// Applies [`resistor_equilibrium`] to every voltage in the sweep.
///
/// Element failures are reported with the offending index.
pub fn sweep_resistor(
    params: &ResistorParams,
    voltages: &[f64],
    ambient_temp_k: f64,
) -> Result<Vec<ResistorEquilibrium>, ThermalError> {
    if voltages.is_empty() {
        return Err(ThermalError::InputMismatch("empty voltage sweep".into()));
    }
    voltages
        .iter()
        .enumerate()
        .map(|(index, &v)| {
            resistor_equilibrium(params, v, ambient_temp_k).map_err(|e| {
                ThermalError::SweepElement {
                    index,
                    source: Box::new(e),
                }
            })
        })
        .collect()
}
