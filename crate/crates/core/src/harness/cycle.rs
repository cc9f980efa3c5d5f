//! Repeated actuation. The model has no wear, so this checks that the
//! pipeline stays deterministic and stable over many periods; it says
//! nothing about material lifetime.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dynamics::{self, DynamicsError, SimConfig, State};
use crate::model;
use crate::params::{Environment, SwitchParams};
use crate::waveform::Waveform;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleMode {
    /// Every cycle starts from rest.
    #[default]
    Reset,
    /// Each cycle starts from the previous cycle's final state.
    Carry,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleSample {
    pub cycle: u64,
    pub switching_time: Option<f64>,
    pub bounce_count: usize,
    pub settle_time: f64,
    pub r_on: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub cycles_run: u64,
    pub samples: Vec<CycleSample>,
    /// Largest relative deviation of any sampled metric from the first sample,
    /// over closed cycles only.
    pub max_relative_drift: f64,
    pub simulated_cycles: u64,
    pub first_failure: Option<u64>,
}

/// Per-cycle parameter perturbation; the default leaves parameters untouched.
pub type CycleHook<'a> = &'a (dyn Fn(u64, &SwitchParams) -> SwitchParams + Sync);

pub fn identity_hook(_cycle: u64, p: &SwitchParams) -> SwitchParams {
    *p
}

#[derive(Debug, Clone, Copy)]
struct CycleResult {
    switching_time: Option<f64>,
    bounce_count: usize,
    settle_time: f64,
    end: State,
}

fn key(p: &SwitchParams, s: State) -> Vec<u64> {
    [
        p.mass_eff,
        p.stiffness,
        p.gap_actuation_295,
        p.gap_contact_295,
        p.lever_ratio,
        p.electrode_area,
        p.gate_capacitance_closed,
        p.r_on_295,
        p.r_off_dc,
        p.c_off,
        p.contact_stiffness,
        p.contact_damping,
        p.struct_damping,
        p.gas_damping_ref,
        p.thermal_gap_shift_max,
        p.gas_contact_damping_ref,
        s.x,
        s.v,
    ]
    .iter()
    .map(|v| v.to_bits())
    .collect()
}

/// Decade sample points: 10^3, 10^4, ... up to `n`, or 1, 10, 100 when `n < 1000`.
pub fn decade_points(n: u64) -> Vec<u64> {
    let all: Vec<u64> = std::iter::successors(Some(1u64), |d| d.checked_mul(10)).take_while(|&d| d <= n).collect();
    let big: Vec<u64> = all.iter().copied().filter(|&d| d >= 1000).collect();
    if big.is_empty() {
        all
    } else {
        big
    }
}

/// Run `n_cycles` single periods of `w`; a cycle whose inputs (parameters after
/// the hook, start state) repeat a previous cycle reuses its result.
pub fn cycling_test(
    p: &SwitchParams,
    env: &Environment,
    w: &Waveform,
    n_cycles: u64,
    sample_decades: bool,
    mode: CycleMode,
    hook: CycleHook<'_>,
) -> Result<CycleReport, DynamicsError> {
    if n_cycles == 0 {
        return Err(DynamicsError::InvalidConfig("n_cycles must be >= 1".into()));
    }
    let one = Waveform { repetitions: 1, ..w.clone() };
    let cfg = SimConfig { record_stride: 10, ..SimConfig::new(one.period) };
    let samples_at = if sample_decades { decade_points(n_cycles) } else { vec![n_cycles] };

    let mut cache: HashMap<Vec<u64>, CycleResult> = HashMap::new();
    let mut state = State::default();
    let mut samples = Vec::new();
    let mut first_failure = None;
    let mut simulated = 0;
    let mut last_key: Option<Vec<u64>> = None;
    let mut last: Option<CycleResult> = None;
    for cycle in 1..=n_cycles {
        let pc = hook(cycle, p);
        let start = match mode {
            CycleMode::Reset => State::default(),
            CycleMode::Carry => state,
        };
        let k = key(&pc, start);
        let res = if last_key.as_ref() == Some(&k) {
            last.expect("set together with last_key")
        } else if let Some(r) = cache.get(&k) {
            *r
        } else {
            let tr = dynamics::simulate_transient_from(&pc, env, &one, &cfg, start)?;
            simulated += 1;
            let m = dynamics::bounce_metrics(&tr);
            let r = CycleResult {
                switching_time: dynamics::switching_time(&tr).seconds(),
                bounce_count: m.bounce_count,
                settle_time: m.settle_time,
                end: tr.final_state,
            };
            cache.insert(k.clone(), r);
            r
        };
        if res.switching_time.is_none() && first_failure.is_none() {
            first_failure = Some(cycle);
        }
        if samples_at.contains(&cycle) {
            samples.push(CycleSample {
                cycle,
                switching_time: res.switching_time,
                bounce_count: res.bounce_count,
                settle_time: res.settle_time,
                r_on: model::on_resistance(&pc, env.temperature),
            });
        }
        state = res.end;
        last_key = Some(k);
        last = Some(res);
    }

    Ok(CycleReport {
        cycles_run: n_cycles,
        max_relative_drift: drift(&samples),
        samples,
        simulated_cycles: simulated,
        first_failure,
    })
}

fn drift(samples: &[CycleSample]) -> f64 {
    let closed: Vec<&CycleSample> = samples.iter().filter(|s| s.switching_time.is_some()).collect();
    let Some(first) = closed.first() else { return 0.0 };
    let rel = |a: f64, b: f64| if a == b { 0.0 } else { (a - b).abs() / a.abs().max(b.abs()) };
    closed
        .iter()
        .map(|s| {
            rel(s.switching_time.unwrap_or(0.0), first.switching_time.unwrap_or(0.0))
                .max(rel(s.bounce_count as f64, first.bounce_count as f64))
                .max(rel(s.settle_time, first.settle_time))
        })
        .fold(0.0, f64::max)
}
