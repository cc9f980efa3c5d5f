//! SP4T routing and two-switch resistive logic, resolved quasi-statically.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{self, DynamicsError, SimConfig, Trace};
use crate::model;
use crate::params::{Environment, ModelError, SwitchParams};
use crate::waveform::Waveform;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("ambiguous logic level {v_out} V (threshold {threshold} V): r_on << r_load << r_off violated")]
    Ambiguous { v_out: f64, threshold: f64 },
    #[error("gate needs a {expected:?} network, circuit is {actual:?}")]
    WrongTopology { expected: Topology, actual: Topology },
    #[error("insufficient level separation: {0}")]
    Separation(String),
    #[error("invalid network: {0}")]
    Invalid(String),
}

/// `v_supply * r_network / (r_network + r_load)`: output taken across the network.
pub fn divider_output(v_supply: f64, r_load: f64, r_network: f64) -> f64 {
    v_supply * r_network / (r_network + r_load)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Series,
    Parallel,
}

/// Per switch: `on_resistance` when closed, `r_off_dc` when open.
pub fn series_parallel_resistance(
    states: &[bool],
    topology: Topology,
    p: &SwitchParams,
    t: f64,
) -> Result<f64, NetworkError> {
    if states.is_empty() {
        return Err(NetworkError::Invalid("no switches".into()));
    }
    let r_on = model::on_resistance(p, t);
    let r = |closed: bool| if closed { r_on } else { p.r_off_dc };
    Ok(match topology {
        Topology::Series => states.iter().map(|&s| r(s)).sum(),
        Topology::Parallel => 1.0 / states.iter().map(|&s| 1.0 / r(s)).sum::<f64>(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogicCircuit {
    pub topology: Topology,
    pub r_load: f64,
    pub v_supply: f64,
    pub switch_count: usize,
}

impl LogicCircuit {
    pub fn nand() -> Self {
        LogicCircuit { topology: Topology::Series, r_load: 10e3, v_supply: 1.0, switch_count: 2 }
    }

    pub fn nor() -> Self {
        LogicCircuit { topology: Topology::Parallel, ..Self::nand() }
    }

    /// Separation of at least 10^3 on both sides of the load.
    pub fn validate(&self, p: &SwitchParams, t: f64) -> Result<(), NetworkError> {
        if self.switch_count != 2 {
            return Err(NetworkError::Invalid(format!("switch_count must be 2, got {}", self.switch_count)));
        }
        if !(self.r_load > 0.0 && self.v_supply > 0.0) {
            return Err(NetworkError::Invalid("r_load and v_supply must be > 0".into()));
        }
        let r_on = model::on_resistance(p, t);
        if self.r_load < 1e3 * r_on {
            return Err(NetworkError::Separation(format!("r_load {} < 1e3 * r_on {r_on}", self.r_load)));
        }
        if p.r_off_dc < 1e3 * self.r_load {
            return Err(NetworkError::Separation(format!("r_off_dc {} < 1e3 * r_load {}", p.r_off_dc, self.r_load)));
        }
        Ok(())
    }

    pub fn threshold(&self) -> f64 {
        0.5 * self.v_supply
    }

    /// Threshold `v_out` at `v_supply / 2`, refusing levels within 10 % of the supply around it.
    pub fn level(&self, v_out: f64) -> Result<LogicLevel, NetworkError> {
        let th = self.threshold();
        if (v_out - th).abs() < 0.1 * self.v_supply {
            return Err(NetworkError::Ambiguous { v_out, threshold: th });
        }
        Ok(LogicLevel { v_out, bit: v_out > th })
    }

    pub fn output(&self, states: &[bool], p: &SwitchParams, t: f64) -> Result<f64, NetworkError> {
        let r = series_parallel_resistance(states, self.topology, p, t)?;
        Ok(divider_output(self.v_supply, self.r_load, r))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogicLevel {
    pub v_out: f64,
    pub bit: bool,
}

fn gate(
    expected: Topology,
    in1: bool,
    in2: bool,
    c: &LogicCircuit,
    p: &SwitchParams,
    t: f64,
) -> Result<LogicLevel, NetworkError> {
    if c.topology != expected {
        return Err(NetworkError::WrongTopology { expected, actual: c.topology });
    }
    c.validate(p, t)?;
    c.level(c.output(&[in1, in2], p, t)?)
}

/// Two switches in series under the load: low only when both gates are driven.
pub fn nand(in1: bool, in2: bool, c: &LogicCircuit, p: &SwitchParams, t: f64) -> Result<LogicLevel, NetworkError> {
    gate(Topology::Series, in1, in2, c, p, t)
}

/// Two switches in parallel under the load: low when either gate is driven.
pub fn nor(in1: bool, in2: bool, c: &LogicCircuit, p: &SwitchParams, t: f64) -> Result<LogicLevel, NetworkError> {
    gate(Topology::Parallel, in1, in2, c, p, t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogicTrace {
    pub times: Vec<f64>,
    pub v_out: Vec<f64>,
    pub switch_closed: [Vec<bool>; 2],
    pub threshold: f64,
}

impl LogicTrace {
    /// Threshold crossings `(time, rising)`, linearly interpolated between samples.
    pub fn crossings(&self) -> Vec<(f64, bool)> {
        let th = self.threshold;
        let mut out = Vec::new();
        for i in 1..self.v_out.len() {
            let (a, b) = (self.v_out[i - 1], self.v_out[i]);
            if (a <= th) != (b <= th) {
                let f = (th - a) / (b - a);
                out.push((self.times[i - 1] + f * (self.times[i] - self.times[i - 1]), b > th));
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t_s", "v_out"])?;
        for (t, v) in self.times.iter().zip(&self.v_out) {
            out.serialize((t, v))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Simulate each switch (concurrently), map contact state to resistance and
/// fold the divider over the shared time grid.
pub fn logic_transient(
    c: &LogicCircuit,
    gates: [&Waveform; 2],
    p: &SwitchParams,
    env: &Environment,
    cfg: &SimConfig,
) -> Result<LogicTrace, NetworkError> {
    c.validate(p, env.temperature)?;
    let (a, b) = rayon::join(
        || dynamics::simulate_transient(p, env, gates[0], cfg),
        || dynamics::simulate_transient(p, env, gates[1], cfg),
    );
    let (a, b): (Trace, Trace) = (a?, b?);
    let closed = |tr: &Trace| (0..tr.times.len()).map(|i| tr.closed_at(i)).collect::<Vec<_>>();
    let (ca, cb) = (closed(&a), closed(&b));
    let mut v_out = Vec::with_capacity(a.times.len());
    for i in 0..a.times.len() {
        v_out.push(c.output(&[ca[i], cb[i]], p, env.temperature)?);
    }
    Ok(LogicTrace { times: a.times, v_out, switch_closed: [ca, cb], threshold: c.threshold() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateDrive {
    Off,
    On,
    /// Closed whenever the gate voltage reaches V_pi (quasi-static).
    Waveform(Waveform),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signal {
    Constant(f64),
    Waveform(Waveform),
}

impl Signal {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            Signal::Constant(v) => *v,
            Signal::Waveform(w) => w.evaluate(t),
        }
    }
}

/// Single-pole four-throw device: one input, four identical switches, one
/// load resistor per output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SP4TDevice {
    pub switch: SwitchParams,
    pub temperature: f64,
    pub gates: [GateDrive; 4],
    pub input: Signal,
    pub r_load: [f64; 4],
}

impl SP4TDevice {
    pub fn new(switch: SwitchParams, temperature: f64) -> Self {
        SP4TDevice {
            switch,
            temperature,
            gates: [GateDrive::Off, GateDrive::Off, GateDrive::Off, GateDrive::Off],
            input: Signal::Constant(1.0),
            r_load: [10e3; 4],
        }
    }

    /// Only gate `n` (0-based) on.
    pub fn select(mut self, n: usize) -> Self {
        for (i, g) in self.gates.iter_mut().enumerate() {
            *g = if i == n { GateDrive::On } else { GateDrive::Off };
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteResult {
    pub time: f64,
    pub closed: [bool; 4],
    /// Input passed straight through a closed throw, 0 otherwise.
    pub raw: [f64; 4],
    /// Voltage across each output load, `v_in * r_load / (r_load + r_switch)`.
    pub divided: [f64; 4],
    pub multi_assert: bool,
}

pub fn route(dev: &SP4TDevice, t: f64) -> Result<RouteResult, NetworkError> {
    dev.switch.validate()?;
    let v_pi = model::pull_in_voltage(&dev.switch, dev.temperature)?;
    let r_on = model::on_resistance(&dev.switch, dev.temperature);
    let v_in = dev.input.at(t);
    let mut res = RouteResult { time: t, closed: [false; 4], raw: [0.0; 4], divided: [0.0; 4], multi_assert: false };
    for i in 0..4 {
        let closed = match &dev.gates[i] {
            GateDrive::Off => false,
            GateDrive::On => true,
            GateDrive::Waveform(w) => w.evaluate(t) >= v_pi,
        };
        let r_sw = if closed { r_on } else { dev.switch.r_off_dc };
        res.closed[i] = closed;
        res.raw[i] = if closed { v_in } else { 0.0 };
        res.divided[i] = v_in * dev.r_load[i] / (dev.r_load[i] + r_sw);
    }
    res.multi_assert = res.closed.iter().filter(|&&c| c).count() > 1;
    Ok(res)
}

/// CSV `t_s,out1,out2,out3,out4` of divided outputs.
pub fn write_route_csv<W: Write>(rows: &[RouteResult], w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t_s", "out1", "out2", "out3", "out4"])?;
    for r in rows {
        out.serialize((r.time, r.divided[0], r.divided[1], r.divided[2], r.divided[3]))?;
    }
    out.flush()?;
    Ok(())
}
