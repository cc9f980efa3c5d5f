//! Temperature-dependent derived quantities of the lumped switch model.

use crate::params::{Environment, ModelError, SwitchParams, T_REF};

pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

/// Lowest temperature at which the on-resistance was characterised, K.
pub const T_CRYO: f64 = 5.8;

/// Fractional on-resistance drop between 295 K and [`T_CRYO`].
pub const R_ON_CRYO_DROP: f64 = 0.153;

const T_MAX: f64 = 400.0;

fn check_temperature(t: f64) -> Result<(), ModelError> {
    if (0.0..=T_MAX).contains(&t) {
        Ok(())
    } else {
        Err(ModelError::TemperatureOutOfRange(t))
    }
}

/// Gap reduction relative to 295 K, linear in (295 - T) and zero above 295 K.
pub fn thermal_gap_shift(p: &SwitchParams, t: f64) -> Result<f64, ModelError> {
    check_temperature(t)?;
    if t >= T_REF {
        Ok(0.0)
    } else {
        Ok(p.thermal_gap_shift_max * (T_REF - t) / T_REF)
    }
}

/// Electrostatic (actuation) gap at temperature `t`.
pub fn gap_at_temperature(p: &SwitchParams, t: f64) -> Result<f64, ModelError> {
    Ok(p.gap_actuation_295 - thermal_gap_shift(p, t)?)
}

/// Tip travel to contact at temperature `t`; shifted by the same absolute amount.
pub fn contact_gap_at_temperature(p: &SwitchParams, t: f64) -> Result<f64, ModelError> {
    Ok(p.gap_contact_295 - thermal_gap_shift(p, t)?)
}

/// Closed-form pull-in voltage for the tip-referred 1-DOF model.
pub fn pull_in_voltage(p: &SwitchParams, t: f64) -> Result<f64, ModelError> {
    let g = gap_at_temperature(p, t)?;
    Ok(pull_in_from_gap(p, g))
}

pub(crate) fn pull_in_from_gap(p: &SwitchParams, g: f64) -> f64 {
    let lam = p.lever_ratio;
    (8.0 * p.stiffness * g.powi(3) / (27.0 * EPSILON_0 * p.electrode_area * lam * lam)).sqrt()
}

/// Closed-state series resistance, linear between the two measured endpoints
/// and clamped outside them.
pub fn on_resistance(p: &SwitchParams, t: f64) -> f64 {
    let tc = t.clamp(T_CRYO, T_REF);
    p.r_on_295 * (1.0 - R_ON_CRYO_DROP * (T_REF - tc) / (T_REF - T_CRYO))
}

/// Sealed-package pressure: isochoric ideal gas with O2 then N2 condensing out.
pub fn gas_pressure(env: &Environment, t: f64) -> f64 {
    if t >= env.t_condense_o2 {
        env.pressure_ref * t / T_REF
    } else if t >= env.t_condense_n2 {
        (1.0 - env.o2_fraction) * env.pressure_ref * t / T_REF
    } else {
        env.residual_pressure_fraction * env.pressure_ref
    }
}

/// `gas_pressure / pressure_ref`, the factor applied to every gas damper.
pub fn pressure_ratio(env: &Environment, t: f64) -> f64 {
    if env.pressure_ref > 0.0 {
        gas_pressure(env, t) / env.pressure_ref
    } else {
        0.0
    }
}
