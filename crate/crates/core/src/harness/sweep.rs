use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibrate::{bounce_config, bounce_pulse};
use crate::dynamics::{self, DynamicsError};
use crate::model;
use crate::params::{Environment, SwitchParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TempPoint {
    pub temperature: f64,
    pub pressure: f64,
    pub damping: f64,
    pub contact_damping: f64,
    pub bounce_count: usize,
    pub ring_down: f64,
    pub first_impact_velocity: f64,
    pub pull_in_voltage: f64,
    pub on_resistance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TempSweepReport {
    pub points: Vec<TempPoint>,
    /// First temperature, in list order, with more than one bounce.
    pub onset: Option<f64>,
}

/// Per-temperature damping, bounce count under the standard pulse, V_pi and
/// R_on. Points run concurrently and are merged by index.
pub fn temperature_sweep(p: &SwitchParams, env: &Environment, temps: &[f64]) -> Result<TempSweepReport, DynamicsError> {
    let w = bounce_pulse();
    let cfg = bounce_config();
    let points = temps
        .par_iter()
        .map(|&t| {
            let e = env.with_temperature(t);
            let tr = dynamics::simulate_transient(p, &e, &w, &cfg)?;
            let m = dynamics::bounce_metrics(&tr);
            Ok(TempPoint {
                temperature: t,
                pressure: model::gas_pressure(&e, t),
                damping: dynamics::damping_coefficient(p, &e),
                contact_damping: dynamics::contact_damping_coefficient(p, &e),
                bounce_count: m.bounce_count,
                ring_down: m.ring_down_duration,
                first_impact_velocity: m.first_impact_velocity,
                pull_in_voltage: model::pull_in_voltage(p, t)?,
                on_resistance: model::on_resistance(p, t),
            })
        })
        .collect::<Result<Vec<_>, DynamicsError>>()?;
    let onset = points.iter().find(|pt| pt.bounce_count > 1).map(|pt| pt.temperature);
    Ok(TempSweepReport { points, onset })
}

/// `start, start - step, ...` down to and including `stop` (within rounding).
pub fn descending(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((start - stop) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start - i as f64 * step).collect()
}
