//! Derivation of the default parameter set from measured scalar targets.
//!
//! Closed-form steps fix the geometry; bisections on full transient runs fix
//! the mass (switching time), the vacuum damping (cryogenic ring-down) and
//! the gas contact film (bounce onset between the two condensation points).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{self, DynamicsError, SimConfig};
use crate::model::{self, EPSILON_0};
use crate::params::{Environment, ModelError, SwitchParams};
use crate::waveform::{square_pulse, Waveform};

/// Length of the single gate pulse used for bounce characterisation, s.
pub const BOUNCE_WINDOW: f64 = 400e-6;

/// Drive voltage of the standard square pulse, V.
pub const DRIVE_VOLTAGE: f64 = 90.0;

/// One long 90 V pulse; the trace ends while the gate is still high.
pub fn bounce_pulse() -> Waveform {
    square_pulse(DRIVE_VOLTAGE, BOUNCE_WINDOW, 2.0 * BOUNCE_WINDOW, 1).expect("static pulse is valid")
}

/// Simulation window matching [`bounce_pulse`].
pub fn bounce_config() -> SimConfig {
    SimConfig::new(BOUNCE_WINDOW)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalibrationError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("invalid calibration target `{field}`: {reason}")]
    InvalidTarget { field: &'static str, reason: String },
    #[error("{quantity}: bisection bounds [{lo:e}, {hi:e}] do not bracket the target ({diagnostic})")]
    NoBracket { quantity: &'static str, lo: f64, hi: f64, diagnostic: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CalibrationTargets {
    /// V_pi at 295 K, V; must lie in (55, 80).
    pub pull_in_295: f64,
    /// Fractional V_pi drop at 0 K.
    pub pull_in_drop_0k: f64,
    pub thermal_shift: f64,
    pub lever_ratio: f64,
    /// gap_contact_295 / gap_actuation_295.
    pub contact_gap_fraction: f64,
    pub gate_capacitance_closed: f64,
    /// contact_stiffness / stiffness.
    pub contact_stiffness_ratio: f64,
    /// First-contact delay under a `switching_voltage` step at 295 K, s.
    pub switching_time: f64,
    pub switching_voltage: f64,
    /// Free-flight gas damping ratio at the reference pressure.
    pub gas_damping_ratio: f64,
    /// Vacuum contact damping ratio, relative to 2 sqrt(k_c m).
    pub contact_damping_ratio: f64,
    /// Ring-down under [`bounce_pulse`] at `ring_down_temperature`, s.
    pub ring_down: f64,
    pub ring_down_temperature: f64,
    /// Sweep temperature that must still land with <= 1 bounce, K.
    pub onset_quiet_temperature: f64,
    /// Sweep temperature that must already bounce (> 1), K.
    pub onset_bouncing_temperature: f64,
    pub r_on_295: f64,
    pub r_off_dc: f64,
    pub c_off: f64,
}

impl Default for CalibrationTargets {
    fn default() -> Self {
        CalibrationTargets {
            pull_in_295: 78.0,
            pull_in_drop_0k: 0.035,
            thermal_shift: 60e-9,
            lever_ratio: 0.6,
            contact_gap_fraction: 1.0,
            gate_capacitance_closed: 12e-15,
            contact_stiffness_ratio: 5e4,
            switching_time: 2.7e-6,
            switching_voltage: DRIVE_VOLTAGE,
            gas_damping_ratio: 0.004,
            contact_damping_ratio: 0.002,
            ring_down: 150e-6,
            ring_down_temperature: 5.8,
            onset_quiet_temperature: 95.0,
            onset_bouncing_temperature: 90.0,
            r_on_295: 3.0,
            r_off_dc: 1e12,
            c_off: 2e-15,
        }
    }
}

/// What the calibrated set achieves, next to the set itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub params: SwitchParams,
    pub pull_in_295: f64,
    pub switching_time: f64,
    pub ring_down: f64,
    pub struct_damping_ratio: f64,
    pub gas_contact_damping_ratio: f64,
}

/// Geometry fixed by closed-form algebra; the damping ratios are applied to
/// a trial mass by [`Geometry::params`].
struct Geometry {
    t: CalibrationTargets,
    g_a: f64,
    g_c: f64,
    area: f64,
    k: f64,
}

impl Geometry {
    fn new(t: &CalibrationTargets) -> Result<Self, CalibrationError> {
        let check = |field, ok: bool, reason: &str| {
            if ok {
                Ok(())
            } else {
                Err(CalibrationError::InvalidTarget { field, reason: reason.into() })
            }
        };
        check("pull_in_295", t.pull_in_295 > 55.0 && t.pull_in_295 < 80.0, "must lie in (55, 80) V")?;
        check("pull_in_drop_0k", t.pull_in_drop_0k > 0.0 && t.pull_in_drop_0k < 1.0, "must lie in (0, 1)")?;
        check("thermal_shift", t.thermal_shift > 0.0, "must be > 0")?;
        check("lever_ratio", t.lever_ratio > 0.0 && t.lever_ratio <= 1.0, "must lie in (0, 1]")?;
        check(
            "contact_gap_fraction",
            t.contact_gap_fraction > 0.0 && t.contact_gap_fraction <= 1.0,
            "must lie in (0, 1]",
        )?;
        check("switching_voltage", t.switching_voltage > t.pull_in_295, "must exceed pull_in_295")?;
        check("switching_time", t.switching_time > 0.0, "must be > 0")?;
        check("ring_down", t.ring_down > 0.0 && t.ring_down < BOUNCE_WINDOW, "must lie inside the bounce window")?;
        check(
            "onset_quiet_temperature",
            t.onset_quiet_temperature > t.onset_bouncing_temperature,
            "must be above onset_bouncing_temperature",
        )?;

        // (1 - shift/g)^{3/2} = 1 - drop
        let g_a = t.thermal_shift / (1.0 - (1.0 - t.pull_in_drop_0k).powf(2.0 / 3.0));
        let g_c = t.contact_gap_fraction * g_a;
        let lam = t.lever_ratio;
        let area = t.gate_capacitance_closed * (g_a - lam * g_c) / EPSILON_0;
        let k = t.pull_in_295.powi(2) * 27.0 * EPSILON_0 * area * lam * lam / (8.0 * g_a.powi(3));
        Ok(Geometry { t: *t, g_a, g_c, area, k })
    }

    fn params(&self, m: f64, zeta_struct: f64, zeta_gas_contact: f64) -> SwitchParams {
        let k_c = self.t.contact_stiffness_ratio * self.k;
        let crit = 2.0 * (self.k * m).sqrt();
        let crit_c = 2.0 * (k_c * m).sqrt();
        SwitchParams {
            mass_eff: m,
            stiffness: self.k,
            gap_actuation_295: self.g_a,
            gap_contact_295: self.g_c,
            lever_ratio: self.t.lever_ratio,
            electrode_area: self.area,
            gate_capacitance_closed: self.t.gate_capacitance_closed,
            r_on_295: self.t.r_on_295,
            r_off_dc: self.t.r_off_dc,
            c_off: self.t.c_off,
            contact_stiffness: k_c,
            contact_damping: self.t.contact_damping_ratio * crit_c,
            struct_damping: zeta_struct * crit,
            gas_damping_ref: self.t.gas_damping_ratio * crit,
            thermal_gap_shift_max: self.t.thermal_shift,
            gas_contact_damping_ref: zeta_gas_contact * crit_c,
        }
    }
}

fn switching_at(p: &SwitchParams, t: &CalibrationTargets) -> Result<Option<f64>, CalibrationError> {
    let w = square_pulse(t.switching_voltage, 50e-6, 100e-6, 1).expect("static pulse is valid");
    let cfg = SimConfig { record_stride: 1000, ..SimConfig::new(3.0 * t.switching_time) };
    let tr = dynamics::simulate_transient(p, &Environment::default(), &w, &cfg)?;
    Ok(dynamics::switching_time(&tr).seconds())
}

fn bounce_run(p: &SwitchParams, temp: f64) -> Result<dynamics::BounceMetrics, CalibrationError> {
    let cfg = SimConfig { record_stride: 1000, ..bounce_config() };
    let tr = dynamics::simulate_transient(p, &Environment::at(temp), &bounce_pulse(), &cfg)?;
    Ok(dynamics::bounce_metrics(&tr))
}

/// Log-space bisection for the boundary of a predicate that is false at `lo`
/// and true at `hi`. Returns the upper end of the final bracket.
fn log_bisect<F>(quantity: &'static str, lo: f64, hi: f64, rel_tol: f64, mut pred: F) -> Result<f64, CalibrationError>
where
    F: FnMut(f64) -> Result<bool, CalibrationError>,
{
    if pred(lo)? || !pred(hi)? {
        return Err(CalibrationError::NoBracket {
            quantity,
            lo,
            hi,
            diagnostic: "predicate must be false at the lower bound and true at the upper".into(),
        });
    }
    let (mut a, mut b) = (lo, hi);
    while b / a > 1.0 + rel_tol {
        let mid = (a * b).sqrt();
        if pred(mid)? {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(b)
}

/// Calibrate and report achieved values.
pub fn calibrate_with_report(t: &CalibrationTargets) -> Result<CalibrationReport, CalibrationError> {
    let geo = Geometry::new(t)?;
    let mut zs = 0.005;
    let mut zcg = 2.5;
    let mut m;
    // Lightest mass for which the default 1 ns step still resolves the contact.
    let dt = SimConfig::default().dt;
    let k_total = geo.k * (1.0 + t.contact_stiffness_ratio);
    let m_min = 1.01 * k_total * (20.0 * dt / std::f64::consts::TAU).powi(2);

    let solve_mass = |zs: f64, zcg: f64| {
        log_bisect("mass_eff (switching time)", m_min, 1e4 * m_min, 1e-10, |m| {
            let p = geo.params(m, zs, zcg);
            match switching_at(&p, t) {
                Ok(Some(ts)) => Ok(ts > t.switching_time),
                Ok(None) => Ok(true),
                // A beam this light hits the stop faster than the step resolves.
                Err(CalibrationError::Dynamics(DynamicsError::Stability { .. })) => Ok(false),
                Err(e) => Err(e),
            }
        })
    };

    for _ in 0..3 {
        m = solve_mass(zs, zcg)?;
        let quiet = log_bisect("gas_contact_damping_ref (quiet side)", 1e-3, 10.0, 1e-3, |z| {
            Ok(bounce_run(&geo.params(m, zs, z), t.onset_quiet_temperature)?.bounce_count <= 1)
        })?;
        let loud = log_bisect("gas_contact_damping_ref (bouncing side)", 1e-3, 10.0, 1e-3, |z| {
            Ok(bounce_run(&geo.params(m, zs, z), t.onset_bouncing_temperature)?.bounce_count <= 1)
        })?;
        if loud <= quiet {
            return Err(CalibrationError::NoBracket {
                quantity: "gas_contact_damping_ref",
                lo: quiet,
                hi: loud,
                diagnostic: format!(
                    "no contact-film ratio bounces at {} K while staying quiet at {} K",
                    t.onset_bouncing_temperature, t.onset_quiet_temperature
                ),
            });
        }
        zcg = (quiet * loud).sqrt();
        zs = log_bisect("struct_damping (ring-down)", 1e-5, 0.2, 1e-3, |z| {
            Ok(bounce_run(&geo.params(m, z, zcg), t.ring_down_temperature)?.ring_down_duration <= t.ring_down)
        })?;
    }
    m = solve_mass(zs, zcg)?;
    let params = geo.params(m, zs, zcg);
    params.validate()?;
    let pull_in_295 = model::pull_in_voltage(&params, 295.0)?;
    if !(pull_in_295 > 55.0 && pull_in_295 < 80.0) {
        return Err(CalibrationError::InvalidTarget {
            field: "pull_in_295",
            reason: format!("calibrated V_pi {pull_in_295} V left (55, 80) V"),
        });
    }
    Ok(CalibrationReport {
        params,
        pull_in_295,
        switching_time: switching_at(&params, t)?.unwrap_or(f64::NAN),
        ring_down: bounce_run(&params, t.ring_down_temperature)?.ring_down_duration,
        struct_damping_ratio: zs,
        gas_contact_damping_ratio: zcg,
    })
}

/// Produce the default parameter set for `targets`.
pub fn calibrate_defaults(targets: &CalibrationTargets) -> Result<SwitchParams, CalibrationError> {
    calibrate_with_report(targets).map(|r| r.params)
}

/// Output of `calibrate_defaults(&CalibrationTargets::default())`.
pub const FROZEN_DEFAULTS: SwitchParams = SwitchParams {
    mass_eff: 5.115131507620919e-12,
    stiffness: 5.429875005884248,
    gap_actuation_295: 2.5562801293909944e-6,
    gap_contact_295: 2.5562801293909944e-6,
    lever_ratio: 0.6,
    electrode_area: 1.3858012593022386e-9,
    gate_capacitance_closed: 1.2e-14,
    r_on_295: 3.0,
    r_off_dc: 1e12,
    c_off: 2e-15,
    contact_stiffness: 271493.75029421237,
    contact_damping: 4.713769169150466e-6,
    struct_damping: 1.1794820853447835e-7,
    gas_damping_ref: 4.2161233169852586e-8,
    thermal_gap_shift_max: 6e-8,
    gas_contact_damping_ref: 0.005469390120268801,
};
