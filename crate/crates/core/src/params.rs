use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reference (room) temperature of every `_295` field, K.
pub const T_REF: f64 = 295.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("temperature {0} K outside the supported range [0, 400] K")]
    TemperatureOutOfRange(f64),
    #[error("invalid switch parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },
    #[error("invalid environment `{field}`: {reason}")]
    InvalidEnvironment { field: &'static str, reason: String },
}

/// Mechanical, electrostatic and electrical description of one cantilever switch.
///
/// All quantities are SI. `_295` fields are room-temperature values; the
/// temperature dependence lives in [`crate::model`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchParams {
    pub mass_eff: f64,
    pub stiffness: f64,
    pub gap_actuation_295: f64,
    pub gap_contact_295: f64,
    pub lever_ratio: f64,
    pub electrode_area: f64,
    pub gate_capacitance_closed: f64,
    pub r_on_295: f64,
    pub r_off_dc: f64,
    pub c_off: f64,
    pub contact_stiffness: f64,
    pub contact_damping: f64,
    pub struct_damping: f64,
    pub gas_damping_ref: f64,
    pub thermal_gap_shift_max: f64,
    /// Gas-film damper acting only while the tip is in contact, scaled by
    /// package pressure like `gas_damping_ref`. Zero disables it.
    #[serde(default)]
    pub gas_contact_damping_ref: f64,
}

fn positive(field: &'static str, v: f64) -> Result<(), ModelError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidParams { field, reason: format!("must be finite and > 0, got {v}") })
    }
}

fn non_negative(field: &'static str, v: f64) -> Result<(), ModelError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidParams { field, reason: format!("must be finite and >= 0, got {v}") })
    }
}

impl SwitchParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        positive("mass_eff", self.mass_eff)?;
        positive("stiffness", self.stiffness)?;
        positive("gap_actuation_295", self.gap_actuation_295)?;
        positive("gap_contact_295", self.gap_contact_295)?;
        positive("electrode_area", self.electrode_area)?;
        positive("gate_capacitance_closed", self.gate_capacitance_closed)?;
        positive("r_on_295", self.r_on_295)?;
        positive("r_off_dc", self.r_off_dc)?;
        positive("c_off", self.c_off)?;
        positive("contact_stiffness", self.contact_stiffness)?;
        non_negative("contact_damping", self.contact_damping)?;
        non_negative("struct_damping", self.struct_damping)?;
        non_negative("gas_damping_ref", self.gas_damping_ref)?;
        non_negative("gas_contact_damping_ref", self.gas_contact_damping_ref)?;
        non_negative("thermal_gap_shift_max", self.thermal_gap_shift_max)?;
        if !(self.lever_ratio > 0.0 && self.lever_ratio <= 1.0) {
            return Err(ModelError::InvalidParams {
                field: "lever_ratio",
                reason: format!("must lie in (0, 1], got {}", self.lever_ratio),
            });
        }
        if self.gap_contact_295 > self.gap_actuation_295 {
            return Err(ModelError::InvalidParams {
                field: "gap_contact_295",
                reason: "must not exceed gap_actuation_295".into(),
            });
        }
        if self.lever_ratio * self.gap_contact_295 >= self.gap_actuation_295 {
            return Err(ModelError::InvalidParams {
                field: "lever_ratio",
                reason: "gate plate would touch the electrode before the tip reaches contact".into(),
            });
        }
        if self.r_off_dc < 1e6 * self.r_on_295 {
            return Err(ModelError::InvalidParams {
                field: "r_off_dc",
                reason: format!("must be >= 1e6 * r_on_295 ({} ohm)", 1e6 * self.r_on_295),
            });
        }
        if self.thermal_gap_shift_max >= self.gap_contact_295 {
            return Err(ModelError::InvalidParams {
                field: "thermal_gap_shift_max",
                reason: "must be smaller than gap_contact_295 (device would self-close)".into(),
            });
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct serializes")
    }
}

impl Default for SwitchParams {
    /// Frozen output of [`crate::calibrate::calibrate_defaults`] with
    /// [`crate::calibrate::CalibrationTargets::default`]; a test re-runs the
    /// calibration and checks these numbers.
    fn default() -> Self {
        crate::calibrate::FROZEN_DEFAULTS
    }
}

/// Temperature and sealed-package gas state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Environment {
    pub temperature: f64,
    pub pressure_ref: f64,
    pub t_condense_o2: f64,
    pub t_condense_n2: f64,
    pub o2_fraction: f64,
    pub residual_pressure_fraction: f64,
}

impl Default for Environment {
    fn default() -> Self {
        Environment {
            temperature: T_REF,
            pressure_ref: 101_325.0,
            t_condense_o2: 90.2,
            t_condense_n2: 77.4,
            o2_fraction: 0.21,
            residual_pressure_fraction: 1e-4,
        }
    }
}

impl Environment {
    /// Default package at temperature `t`.
    pub fn at(t: f64) -> Self {
        Environment { temperature: t, ..Environment::default() }
    }

    pub fn with_temperature(self, t: f64) -> Self {
        Environment { temperature: t, ..self }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |field, reason: &str| Err(ModelError::InvalidEnvironment { field, reason: reason.to_string() });
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return bad("temperature", "must be > 0");
        }
        if !(self.pressure_ref.is_finite() && self.pressure_ref >= 0.0) {
            return bad("pressure_ref", "must be >= 0");
        }
        if !(0.0..=1.0).contains(&self.o2_fraction) {
            return bad("o2_fraction", "must lie in [0, 1]");
        }
        if !(self.residual_pressure_fraction > 0.0 && self.residual_pressure_fraction < 1.0) {
            return bad("residual_pressure_fraction", "must lie in (0, 1)");
        }
        if self.t_condense_n2 > self.t_condense_o2 {
            return bad("t_condense_n2", "must not exceed t_condense_o2");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        SwitchParams::default().validate().unwrap();
        Environment::default().validate().unwrap();
    }

    #[test]
    fn json_round_trip_uses_field_names() {
        let p = SwitchParams::default();
        let s = p.to_json_pretty();
        for field in ["mass_eff", "gap_actuation_295", "thermal_gap_shift_max", "r_off_dc"] {
            assert!(s.contains(field), "{field} missing");
        }
        assert_eq!(SwitchParams::from_json(&s).unwrap(), p);
    }

    #[test]
    fn rejects_self_closing_shift() {
        let mut p = SwitchParams::default();
        p.thermal_gap_shift_max = p.gap_contact_295;
        assert!(matches!(p.validate(), Err(ModelError::InvalidParams { field: "thermal_gap_shift_max", .. })));
    }

    #[test]
    fn rejects_leaky_off_state() {
        let mut p = SwitchParams::default();
        p.r_off_dc = 1e5 * p.r_on_295;
        assert!(p.validate().is_err());
    }

    #[test]
    fn environment_overrides_deserialize_partially() {
        let env: Environment = serde_json::from_str(r#"{"temperature": 5.8}"#).unwrap();
        assert_eq!(env, Environment::at(5.8));
    }
}
