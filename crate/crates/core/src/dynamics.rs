//! Transient and quasi-static mechanics of the tip-referred 1-DOF model.
//!
//! Equation of motion, with `x` the tip displacement toward contact:
//!
//! ```text
//! m x'' + b x' + k x = lambda * F_es(x, V) + F_contact(x, x')
//! F_es = eps0 A V^2 / (2 (g - lambda x)^2)
//! ```
//!
//! `F_es` acts on the gate plate, which moves `lambda x`; the virtual-work
//! factor `lambda` refers it to the tip coordinate.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{self, EPSILON_0};
use crate::params::{Environment, ModelError, SwitchParams};
use crate::waveform::{Waveform, WaveformError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Waveform(#[from] WaveformError),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("actuation gap closed (lambda*x >= g_eff) at t = {time:.4e} s")]
    Singularity { time: f64 },
    #[error(
        "contact overshoot {overshoot:.3} % of gap_contact at t = {time:.4e} s exceeds 1 %; \
         reduce dt (currently {dt:.3e} s)"
    )]
    Stability { time: f64, overshoot: f64, dt: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    pub record_stride: usize,
    pub contact_epsilon: f64,
}

impl SimConfig {
    pub fn new(t_end: f64) -> Self {
        SimConfig { t_end, ..SimConfig::default() }
    }

    /// Largest step that resolves the penalty contact with 20 steps per period.
    pub fn max_dt(p: &SwitchParams) -> f64 {
        std::f64::consts::TAU * (p.mass_eff / (p.stiffness + p.contact_stiffness)).sqrt() / 20.0
    }

    pub fn validate(&self, p: &SwitchParams) -> Result<(), DynamicsError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(DynamicsError::InvalidConfig(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(DynamicsError::InvalidConfig(format!("t_end must be > 0, got {}", self.t_end)));
        }
        if self.record_stride == 0 {
            return Err(DynamicsError::InvalidConfig("record_stride must be >= 1".into()));
        }
        if !(self.contact_epsilon > 0.0) {
            return Err(DynamicsError::InvalidConfig("contact_epsilon must be > 0".into()));
        }
        let limit = Self::max_dt(p);
        if self.dt > limit {
            return Err(DynamicsError::InvalidConfig(format!(
                "dt = {:.3e} s does not resolve the contact spring; must be <= {limit:.3e} s",
                self.dt
            )));
        }
        Ok(())
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { dt: 1e-9, t_end: 100e-6, record_stride: 10, contact_epsilon: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactEvent {
    pub touch_time: f64,
    pub leave_time: Option<f64>,
    /// Tip velocity when the contact gap was crossed inward.
    pub impact_velocity: f64,
    /// Tip velocity when the contact gap was crossed outward.
    pub leave_velocity: Option<f64>,
    /// Largest opening (gap_contact - x) during the flight that ended here.
    pub separation_before: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub times: Vec<f64>,
    pub tip_position: Vec<f64>,
    pub tip_velocity: Vec<f64>,
    pub gate_voltage: Vec<f64>,
    pub contact_events: Vec<ContactEvent>,
    pub contact_gap: f64,
    pub contact_epsilon: f64,
    /// First 0 V -> nonzero transition of the gate program.
    pub rising_edge: Option<f64>,
    /// First nonzero -> 0 V transition at or after the first contact.
    pub release_edge: Option<f64>,
    pub final_state: State,
}

/// Plate force `eps0 A V^2 / (2 (g_eff - lambda x)^2)` at temperature `t`.
pub fn electrostatic_force(p: &SwitchParams, t: f64, x: f64, volts: f64) -> Result<f64, DynamicsError> {
    let g = model::gap_at_temperature(p, t)?;
    let d = g - p.lever_ratio * x;
    if d <= 0.0 {
        return Err(DynamicsError::Singularity { time: f64::NAN });
    }
    Ok(EPSILON_0 * p.electrode_area * volts * volts / (2.0 * d * d))
}

/// Free-flight damping `struct_damping + gas_damping_ref * p/p_ref`.
pub fn damping_coefficient(p: &SwitchParams, env: &Environment) -> f64 {
    p.struct_damping + p.gas_damping_ref * model::pressure_ratio(env, env.temperature)
}

/// Penalty damper active while in contact.
pub fn contact_damping_coefficient(p: &SwitchParams, env: &Environment) -> f64 {
    p.contact_damping + p.gas_contact_damping_ref * model::pressure_ratio(env, env.temperature)
}

struct Plant {
    m: f64,
    k: f64,
    lam: f64,
    es: f64,
    g_eff: f64,
    g_c: f64,
    b: f64,
    k_c: f64,
    c_c: f64,
}

impl Plant {
    fn new(p: &SwitchParams, env: &Environment) -> Result<Self, DynamicsError> {
        let t = env.temperature;
        Ok(Plant {
            m: p.mass_eff,
            k: p.stiffness,
            lam: p.lever_ratio,
            es: 0.5 * p.lever_ratio * EPSILON_0 * p.electrode_area,
            g_eff: model::gap_at_temperature(p, t)?,
            g_c: model::contact_gap_at_temperature(p, t)?,
            b: damping_coefficient(p, env),
            k_c: p.contact_stiffness,
            c_c: contact_damping_coefficient(p, env),
        })
    }

    #[inline]
    fn accel(&self, x: f64, v: f64, volts: f64) -> f64 {
        let d = self.g_eff - self.lam * x;
        if d <= 0.0 {
            return f64::NAN;
        }
        let mut f = self.es * volts * volts / (d * d) - self.k * x - self.b * v;
        if x > self.g_c {
            let fc = -self.k_c * (x - self.g_c) - self.c_c * v;
            if fc < 0.0 {
                f += fc;
            }
        }
        f / self.m
    }
}

/// Integrate from rest.
pub fn simulate_transient(
    p: &SwitchParams,
    env: &Environment,
    w: &Waveform,
    cfg: &SimConfig,
) -> Result<Trace, DynamicsError> {
    simulate_transient_from(p, env, w, cfg, State::default())
}

/// Integrate with fixed-step RK4 from `init`. Time `i * dt` is computed from the
/// step index so runs are bit-reproducible.
pub fn simulate_transient_from(
    p: &SwitchParams,
    env: &Environment,
    w: &Waveform,
    cfg: &SimConfig,
    init: State,
) -> Result<Trace, DynamicsError> {
    p.validate()?;
    env.validate()?;
    w.validate()?;
    cfg.validate(p)?;
    let plant = Plant::new(p, env)?;
    // Explicit RK4 loses stability on the real axis near h*lambda = 2.78.
    if plant.c_c * cfg.dt / plant.m > 2.0 || plant.b * cfg.dt / plant.m > 2.0 {
        return Err(DynamicsError::InvalidConfig(format!(
            "damping too stiff for dt = {:.3e} s (contact damper {:.3e} N s/m)",
            cfg.dt, plant.c_c
        )));
    }
    let sampler = w.sampler();
    let dt = cfg.dt;
    let n = (cfg.t_end / dt).round().max(1.0) as u64;
    let stride = cfg.record_stride as u64;
    let cap = (n / stride + 2) as usize;

    let mut tr = Trace {
        times: Vec::with_capacity(cap),
        tip_position: Vec::with_capacity(cap),
        tip_velocity: Vec::with_capacity(cap),
        gate_voltage: Vec::with_capacity(cap),
        contact_events: Vec::new(),
        contact_gap: plant.g_c,
        contact_epsilon: cfg.contact_epsilon,
        rising_edge: first_rising_edge(w),
        release_edge: None,
        final_state: init,
    };
    let (mut x, mut v) = (init.x, init.v);
    let record = |tr: &mut Trace, t: f64, x: f64, v: f64| {
        tr.times.push(t);
        tr.tip_position.push(x);
        tr.tip_velocity.push(v);
        tr.gate_voltage.push(sampler.at(t));
    };
    record(&mut tr, 0.0, x, v);

    let g_c = plant.g_c;
    let mut touching = x > g_c;
    let mut min_x = x;

    for i in 0..n {
        let t = i as f64 * dt;
        let v0 = sampler.at(t);
        let vh = sampler.at(t + 0.5 * dt);
        let v1 = sampler.at(t + dt);

        let a1 = plant.accel(x, v, v0);
        let u2 = v + 0.5 * dt * a1;
        let a2 = plant.accel(x + 0.5 * dt * v, u2, vh);
        let u3 = v + 0.5 * dt * a2;
        let a3 = plant.accel(x + 0.5 * dt * u2, u3, vh);
        let u4 = v + dt * a3;
        let a4 = plant.accel(x + dt * u3, u4, v1);
        let xn = x + dt / 6.0 * (v + 2.0 * u2 + 2.0 * u3 + u4);
        let vn = v + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);

        let t1 = (i + 1) as f64 * dt;
        if xn - g_c > 0.01 * g_c {
            return Err(DynamicsError::Stability { time: t1, overshoot: 100.0 * (xn - g_c) / g_c, dt });
        }
        if !(xn.is_finite() && vn.is_finite()) {
            return Err(DynamicsError::Stability { time: t1, overshoot: f64::NAN, dt });
        }
        if plant.lam * xn >= plant.g_eff {
            return Err(DynamicsError::Singularity { time: t1 });
        }

        if !touching && xn > g_c {
            let f = (g_c - x) / (xn - x);
            tr.contact_events.push(ContactEvent {
                touch_time: t + f * dt,
                leave_time: None,
                impact_velocity: v + f * (vn - v),
                leave_velocity: None,
                separation_before: g_c - min_x,
            });
            touching = true;
        } else if touching && xn <= g_c {
            let f = (x - g_c) / (x - xn);
            if let Some(ev) = tr.contact_events.last_mut() {
                ev.leave_time = Some(t + f * dt);
                ev.leave_velocity = Some(v + f * (vn - v));
            }
            touching = false;
            min_x = xn;
        }
        if !touching && xn < min_x {
            min_x = xn;
        }

        x = xn;
        v = vn;
        if (i + 1) % stride == 0 || i + 1 == n {
            record(&mut tr, t1, x, v);
        }
    }
    tr.final_state = State { x, v };
    if let Some(first) = tr.contact_events.first() {
        tr.release_edge = next_zero_edge(w, first.touch_time);
    }
    Ok(tr)
}

/// First 0 -> nonzero transition, treating the gate as 0 V before t = 0.
pub fn first_rising_edge(w: &Waveform) -> Option<f64> {
    if w.repetitions == 0 {
        return None;
    }
    let mut prev = 0.0;
    let mut t = 0.0;
    for s in &w.segments {
        if prev == 0.0 && s.voltage > 0.0 {
            return Some(t);
        }
        prev = s.voltage;
        t += s.duration;
    }
    None
}

/// First nonzero -> 0 V transition at or after `after`.
pub fn next_zero_edge(w: &Waveform, after: f64) -> Option<f64> {
    if w.segments.is_empty() || w.repetitions == 0 {
        return None;
    }
    let covered: f64 = w.segments.iter().map(|s| s.duration).sum();
    let gapless = covered >= w.period;
    let first_v = w.segments[0].voltage;
    let last_v = w.segments[w.segments.len() - 1].voltage;
    let start_rep = (after / w.period).floor().max(0.0) as u64;
    for rep in start_rep..w.repetitions {
        let mut t = rep as f64 * w.period;
        let mut prev = if rep > 0 && gapless { last_v } else { 0.0 };
        for s in &w.segments {
            if prev > 0.0 && s.voltage == 0.0 && t >= after {
                return Some(t);
            }
            prev = s.voltage;
            t += s.duration;
        }
        let next = if gapless && rep + 1 < w.repetitions { first_v } else { 0.0 };
        if prev > 0.0 && next == 0.0 && t >= after {
            return Some(t);
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BounceMetrics {
    pub bounce_count: usize,
    pub first_impact_velocity: f64,
    pub ring_down_duration: f64,
    pub settle_time: f64,
}

/// Bounce statistics of the closure that starts at the first contact.
///
/// A bounce is a re-touch whose preceding flight opened the gap by more than
/// `contact_epsilon`; counting stops at the release edge.
pub fn bounce_metrics(tr: &Trace) -> BounceMetrics {
    let settle_time = settle_time(tr);
    let Some(first) = tr.contact_events.first() else {
        return BounceMetrics { settle_time, ..BounceMetrics::default() };
    };
    let window_end = tr.release_edge.unwrap_or(f64::INFINITY);
    let mut count = 0;
    let mut last = first.touch_time;
    for ev in &tr.contact_events[1..] {
        if ev.touch_time >= window_end {
            break;
        }
        if ev.separation_before > tr.contact_epsilon {
            count += 1;
            last = ev.touch_time;
        }
    }
    BounceMetrics {
        bounce_count: count,
        first_impact_velocity: first.impact_velocity.abs(),
        ring_down_duration: last - first.touch_time,
        settle_time,
    }
}

fn settle_time(tr: &Trace) -> f64 {
    let Some(&x_final) = tr.tip_position.last() else { return 0.0 };
    let start = tr.rising_edge.unwrap_or(0.0);
    let eps = tr.contact_epsilon;
    let end = match tr.tip_position.iter().rposition(|x| (x - x_final).abs() > eps) {
        Some(j) => tr.times[(j + 1).min(tr.times.len() - 1)],
        None => tr.times[0],
    };
    (end - start).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchOutcome {
    Closed(f64),
    DidNotClose,
    NoGateEdge,
}

impl SwitchOutcome {
    pub fn seconds(&self) -> Option<f64> {
        match self {
            SwitchOutcome::Closed(t) => Some(*t),
            _ => None,
        }
    }
}

/// Delay from the first rising gate edge to the first contact after it.
pub fn switching_time(tr: &Trace) -> SwitchOutcome {
    let Some(edge) = tr.rising_edge else { return SwitchOutcome::NoGateEdge };
    match tr.contact_events.iter().find(|e| e.touch_time >= edge) {
        Some(e) => SwitchOutcome::Closed(e.touch_time - edge),
        None => SwitchOutcome::DidNotClose,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub bounce_metrics: BounceMetrics,
    pub switching_time: SwitchOutcome,
    pub contact_events: usize,
}

impl Trace {
    pub fn summary(&self) -> TraceSummary {
        TraceSummary {
            bounce_metrics: bounce_metrics(self),
            switching_time: switching_time(self),
            contact_events: self.contact_events.len(),
        }
    }

    /// Is the tip on the contact (x > gap_contact) at recorded sample `i`?
    pub fn closed_at(&self, i: usize) -> bool {
        self.tip_position[i] > self.contact_gap
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t_s", "x_m", "v_mps", "v_gate"])?;
        for i in 0..self.times.len() {
            out.serialize((self.times[i], self.tip_position[i], self.tip_velocity[i], self.gate_voltage[i]))?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub voltage: f64,
    /// Stable-branch tip deflection; `None` once no stable root exists.
    pub deflection: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PullInSweep {
    pub temperature: f64,
    pub points: Vec<SweepPoint>,
    pub pull_in_voltage: Option<f64>,
}

/// Static equilibrium curve by bisection and the first voltage without a
/// stable root.
///
/// `h(x) = k x - lambda F_es(x, V)` is concave on the admissible range, so its
/// maximum is found by bisecting `h'`, and the stable root is the first zero
/// of `h` to the left of that maximum.
pub fn quasi_static_sweep(
    p: &SwitchParams,
    env: &Environment,
    v_max: f64,
    v_step: f64,
) -> Result<PullInSweep, DynamicsError> {
    if !(v_step > 0.0) || !(v_max >= 0.0) {
        return Err(DynamicsError::InvalidConfig("v_step must be > 0 and v_max >= 0".into()));
    }
    p.validate()?;
    let t = env.temperature;
    let g = model::gap_at_temperature(p, t)?;
    let g_c = model::contact_gap_at_temperature(p, t)?;
    let n = (v_max / v_step + 1e-9).floor() as usize;
    let mut points = Vec::with_capacity(n + 1);
    let mut pull_in = None;
    for i in 0..=n {
        let volts = i as f64 * v_step;
        let x = if pull_in.is_some() { None } else { static_root(p, g, g_c, volts) };
        if x.is_none() && pull_in.is_none() {
            pull_in = Some(volts);
        }
        points.push(SweepPoint { voltage: volts, deflection: x });
    }
    Ok(PullInSweep { temperature: t, points, pull_in_voltage: pull_in })
}

fn static_root(p: &SwitchParams, g: f64, g_c: f64, volts: f64) -> Option<f64> {
    let lam = p.lever_ratio;
    let c = 0.5 * lam * EPSILON_0 * p.electrode_area * volts * volts;
    let h = |x: f64| p.stiffness * x - c / (g - lam * x).powi(2);
    let dh = |x: f64| p.stiffness - 2.0 * lam * c / (g - lam * x).powi(3);
    if volts == 0.0 {
        return Some(0.0);
    }
    let x_hi = g_c.min(g / lam * (1.0 - 1e-12));
    let x_peak = if dh(x_hi) >= 0.0 {
        x_hi
    } else {
        let (mut lo, mut hi) = (0.0, x_hi);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if dh(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * x_hi {
                break;
            }
        }
        lo
    };
    if h(x_peak) < 0.0 {
        return None;
    }
    let (mut lo, mut hi) = (0.0, x_peak);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * x_hi {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::{square_pulse, Segment};
    use approx::assert_relative_eq;

    fn rt() -> Environment {
        Environment::default()
    }

    #[test]
    fn force_symmetry_and_zero() {
        let p = SwitchParams::default();
        assert_eq!(electrostatic_force(&p, 295.0, 1e-7, 0.0).unwrap(), 0.0);
        assert_eq!(
            electrostatic_force(&p, 295.0, 1e-7, 40.0).unwrap(),
            electrostatic_force(&p, 295.0, 1e-7, -40.0).unwrap()
        );
        let hand = EPSILON_0 * p.electrode_area * 8100.0 / (2.0 * p.gap_actuation_295.powi(2));
        assert_relative_eq!(electrostatic_force(&p, 295.0, 0.0, 90.0).unwrap(), hand, max_relative = 1e-14);
        let closed = p.gap_actuation_295 / p.lever_ratio;
        assert!(matches!(electrostatic_force(&p, 295.0, closed, 10.0), Err(DynamicsError::Singularity { .. })));
    }

    #[test]
    fn damping_values() {
        let p = SwitchParams::default();
        assert_relative_eq!(damping_coefficient(&p, &rt()), p.struct_damping + p.gas_damping_ref);
        assert_relative_eq!(
            damping_coefficient(&p, &Environment::at(5.8)),
            p.struct_damping + 1e-4 * p.gas_damping_ref
        );
        assert_relative_eq!(
            damping_coefficient(&p, &Environment::at(100.0)),
            p.struct_damping + 100.0 / 295.0 * p.gas_damping_ref,
            max_relative = 1e-12
        );
    }

    #[test]
    fn zero_waveform_stays_at_rest() {
        let p = SwitchParams::default();
        let tr = simulate_transient(&p, &rt(), &Waveform::zero(), &SimConfig::new(5e-6)).unwrap();
        assert!(tr.tip_position.iter().all(|&x| x == 0.0));
        assert!(tr.contact_events.is_empty());
        assert_eq!(switching_time(&tr), SwitchOutcome::NoGateEdge);
    }

    #[test]
    fn sub_pull_in_does_not_close() {
        let p = SwitchParams::default();
        let w = square_pulse(50.0, 50e-6, 100e-6, 1).unwrap();
        let tr = simulate_transient(&p, &rt(), &w, &SimConfig::new(20e-6)).unwrap();
        assert_eq!(switching_time(&tr), SwitchOutcome::DidNotClose);
        let m = bounce_metrics(&tr);
        assert_eq!((m.bounce_count, m.first_impact_velocity, m.ring_down_duration), (0, 0.0, 0.0));
    }

    #[test]
    fn rejects_coarse_dt() {
        let p = SwitchParams::default();
        let cfg = SimConfig { dt: 10.0 * SimConfig::max_dt(&p), ..SimConfig::new(1e-6) };
        assert!(matches!(simulate_transient(&p, &rt(), &Waveform::zero(), &cfg), Err(DynamicsError::InvalidConfig(_))));
    }

    #[test]
    fn soft_contact_reports_stability_error() {
        let mut p = SwitchParams::default();
        p.contact_stiffness = p.stiffness * 2.0;
        let w = square_pulse(120.0, 50e-6, 100e-6, 1).unwrap();
        let err = simulate_transient(&p, &rt(), &w, &SimConfig::new(10e-6)).unwrap_err();
        assert!(matches!(err, DynamicsError::Stability { .. }), "{err}");
        assert!(err.to_string().contains("reduce dt"));
    }

    fn crafted(touches: &[(f64, f64, f64)]) -> Trace {
        Trace {
            times: vec![0.0, 1.0],
            tip_position: vec![0.0, 1.0],
            tip_velocity: vec![0.0, 0.0],
            gate_voltage: vec![1.0, 1.0],
            contact_events: touches
                .iter()
                .map(|&(t, l, s)| ContactEvent {
                    touch_time: t,
                    leave_time: Some(l),
                    impact_velocity: -0.5,
                    leave_velocity: Some(0.1),
                    separation_before: s,
                })
                .collect(),
            contact_gap: 1.0,
            contact_epsilon: 1e-9,
            rising_edge: Some(0.0),
            release_edge: None,
            final_state: State::default(),
        }
    }

    #[test]
    fn crafted_bounces_counted() {
        let tr = crafted(&[(0.1, 0.2, 1.0), (0.3, 0.4, 1e-3), (0.5, 0.6, 1e-3), (0.7, 0.8, 1e-3)]);
        let m = bounce_metrics(&tr);
        assert_eq!(m.bounce_count, 3);
        assert_relative_eq!(m.ring_down_duration, 0.6);
        assert_eq!(m.first_impact_velocity, 0.5);
    }

    #[test]
    fn chatter_below_epsilon_is_not_a_bounce() {
        let tr = crafted(&[(0.1, 0.2, 1.0), (0.3, 0.4, 1e-10), (0.5, 0.6, 5e-9)]);
        assert_eq!(bounce_metrics(&tr).bounce_count, 1);
    }

    #[test]
    fn zero_edges() {
        let w = square_pulse(90.0, 50e-6, 100e-6, 3).unwrap();
        assert_eq!(first_rising_edge(&w), Some(0.0));
        assert_relative_eq!(next_zero_edge(&w, 1e-6).unwrap(), 50e-6);
        assert_relative_eq!(next_zero_edge(&w, 60e-6).unwrap(), 150e-6);
        assert_eq!(next_zero_edge(&w, 260e-6), None);
        let late = Waveform::new(vec![Segment::new(0.0, 5e-6), Segment::new(90.0, 10e-6)], 20e-6, 1).unwrap();
        assert_eq!(first_rising_edge(&late), Some(5e-6));
        assert_relative_eq!(next_zero_edge(&late, 6e-6).unwrap(), 15e-6);
        let full = Waveform::new(vec![Segment::new(90.0, 20e-6)], 20e-6, 2).unwrap();
        assert_relative_eq!(next_zero_edge(&full, 1e-6).unwrap(), 40e-6);
    }

    #[test]
    fn sweep_zero_voltage_is_rest() {
        let p = SwitchParams::default();
        let s = quasi_static_sweep(&p, &rt(), 10.0, 1.0).unwrap();
        assert_eq!(s.points[0].deflection, Some(0.0));
        assert!(s.pull_in_voltage.is_none());
    }

    #[test]
    fn csv_header() {
        let p = SwitchParams::default();
        let tr = simulate_transient(&p, &rt(), &Waveform::zero(), &SimConfig::new(1e-7)).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t_s,x_m,v_mps,v_gate\n"));
        assert_eq!(text.lines().count(), tr.times.len() + 1);
    }
}
