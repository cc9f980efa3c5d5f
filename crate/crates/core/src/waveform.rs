//! Piecewise-constant gate programs, the dual-pulse engineered waveform and
//! the actuation power formula.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WaveformError {
    #[error("invalid waveform: {0}")]
    Invalid(String),
    #[error("region ordering violated: {0}")]
    RegionOrdering(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub voltage: f64,
    pub duration: f64,
}

impl Segment {
    pub fn new(voltage: f64, duration: f64) -> Self {
        Segment { voltage, duration }
    }
}

/// Ordered constant-voltage segments repeated `repetitions` times with the
/// given `period`. Time not covered by segments inside a period is 0 V.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    pub segments: Vec<Segment>,
    pub period: f64,
    pub repetitions: u64,
}

impl Waveform {
    pub fn new(segments: Vec<Segment>, period: f64, repetitions: u64) -> Result<Self, WaveformError> {
        let w = Waveform { segments, period, repetitions };
        w.validate()?;
        Ok(w)
    }

    /// 0 V forever.
    pub fn zero() -> Self {
        Waveform { segments: Vec::new(), period: 1.0, repetitions: 0 }
    }

    pub fn validate(&self) -> Result<(), WaveformError> {
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(WaveformError::Invalid(format!("period must be > 0, got {}", self.period)));
        }
        let mut total = 0.0;
        for (i, s) in self.segments.iter().enumerate() {
            if !(s.duration.is_finite() && s.duration > 0.0) {
                return Err(WaveformError::Invalid(format!("segment {i} duration must be > 0")));
            }
            if !(s.voltage.is_finite() && s.voltage >= 0.0) {
                return Err(WaveformError::Invalid(format!("segment {i} voltage must be >= 0")));
            }
            total += s.duration;
        }
        if total > self.period * (1.0 + 1e-12) {
            return Err(WaveformError::Invalid(format!(
                "segments span {total} s, longer than the period {} s",
                self.period
            )));
        }
        Ok(())
    }

    /// End of the last repetition.
    pub fn span(&self) -> f64 {
        self.period * self.repetitions as f64
    }

    /// Right-continuous lookup with periodic extension; 0 outside the program.
    pub fn evaluate(&self, t: f64) -> f64 {
        if !(t >= 0.0) || t >= self.span() {
            return 0.0;
        }
        let k = (t / self.period).floor();
        let tt = t - k * self.period;
        let mut end = 0.0;
        for s in &self.segments {
            end += s.duration;
            if tt < end {
                return s.voltage;
            }
        }
        0.0
    }

    /// Fastest path for a simulation loop: cumulative segment ends.
    pub(crate) fn sampler(&self) -> Sampler {
        let mut ends = Vec::with_capacity(self.segments.len());
        let mut acc = 0.0;
        for s in &self.segments {
            acc += s.duration;
            ends.push(acc);
        }
        Sampler {
            ends,
            volts: self.segments.iter().map(|s| s.voltage).collect(),
            period: self.period,
            span: self.span(),
        }
    }

    /// Merge zero-length and equal-voltage neighbours; drop a trailing 0 V segment
    /// (it is implied by the period).
    pub fn normalized(&self) -> Waveform {
        let mut out: Vec<Segment> = Vec::new();
        for s in &self.segments {
            if s.duration <= 0.0 {
                continue;
            }
            match out.last_mut() {
                Some(last) if last.voltage == s.voltage => last.duration += s.duration,
                _ => out.push(*s),
            }
        }
        if out.last().is_some_and(|s| s.voltage == 0.0) {
            out.pop();
        }
        Waveform { segments: out, period: self.period, repetitions: self.repetitions }
    }
}

pub(crate) struct Sampler {
    ends: Vec<f64>,
    volts: Vec<f64>,
    period: f64,
    span: f64,
}

impl Sampler {
    #[inline]
    pub(crate) fn at(&self, t: f64) -> f64 {
        if !(t >= 0.0) || t >= self.span {
            return 0.0;
        }
        let tt = t - (t / self.period).floor() * self.period;
        for (end, v) in self.ends.iter().zip(&self.volts) {
            if tt < *end {
                return *v;
            }
        }
        0.0
    }
}

/// Free-function form of [`Waveform::evaluate`].
pub fn evaluate(w: &Waveform, t: f64) -> f64 {
    w.evaluate(t)
}

/// `v` for `t_on`, then 0 V for the rest of the period.
pub fn square_pulse(v: f64, t_on: f64, period: f64, reps: u64) -> Result<Waveform, WaveformError> {
    if !(t_on < period) {
        return Err(WaveformError::Invalid(format!("t_on ({t_on} s) must be shorter than the period ({period} s)")));
    }
    Waveform::new(vec![Segment::new(v, t_on), Segment::new(0.0, period - t_on)], period, reps)
}

/// `P = C V^2 f / 2`.
pub fn actuation_power(c_gate: f64, v: f64, f: f64) -> f64 {
    0.5 * c_gate * v * v * f
}

/// Kick/coast/hold actuation followed by release-coast/catch/zero release.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineeredSpec {
    pub v_kick: f64,
    pub t_kick: f64,
    pub v_coast: f64,
    pub t_coast: f64,
    pub v_hold: f64,
    pub t_hold: f64,
    pub v_release_coast: f64,
    pub t_release_coast: f64,
    pub v_catch: f64,
    pub t_catch: f64,
    #[serde(default = "default_period")]
    pub period: f64,
}

fn default_period() -> f64 {
    100e-6
}

impl EngineeredSpec {
    /// 90 V / 2 us kick, 55 V / 1 us coast, 90 V hold filling half the 10 kHz
    /// period, then 0 V / 1 us, 80 V / 2 us catch and 0 V.
    pub fn dual_pulse_defaults() -> Self {
        EngineeredSpec {
            v_kick: 90.0,
            t_kick: 2e-6,
            v_coast: 55.0,
            t_coast: 1e-6,
            v_hold: 90.0,
            t_hold: 47e-6,
            v_release_coast: 0.0,
            t_release_coast: 1e-6,
            v_catch: 80.0,
            t_catch: 2e-6,
            period: 100e-6,
        }
    }

    /// Time at which the hold ends and the release program starts.
    pub fn release_start(&self) -> f64 {
        self.t_kick + self.t_coast + self.t_hold
    }

    pub fn validate(&self, v_pi: f64) -> Result<(), WaveformError> {
        let durations = [
            ("t_kick", self.t_kick, true),
            ("t_coast", self.t_coast, false),
            ("t_hold", self.t_hold, true),
            ("t_release_coast", self.t_release_coast, false),
            ("t_catch", self.t_catch, false),
        ];
        for (name, d, strict) in durations {
            let ok = d.is_finite() && if strict { d > 0.0 } else { d >= 0.0 };
            if !ok {
                let rel = if strict { "> 0" } else { ">= 0" };
                return Err(WaveformError::Invalid(format!("{name} must be {rel}, got {d}")));
            }
        }
        for (name, v) in [
            ("v_kick", self.v_kick),
            ("v_coast", self.v_coast),
            ("v_hold", self.v_hold),
            ("v_release_coast", self.v_release_coast),
            ("v_catch", self.v_catch),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(WaveformError::Invalid(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !(self.v_kick > v_pi) {
            return Err(WaveformError::RegionOrdering(format!(
                "v_kick ({} V) must exceed V_pi ({v_pi:.3} V)",
                self.v_kick
            )));
        }
        if self.t_coast > 0.0 && !(self.v_coast < v_pi) {
            return Err(WaveformError::RegionOrdering(format!(
                "v_coast ({} V) must be below V_pi ({v_pi:.3} V)",
                self.v_coast
            )));
        }
        if self.t_catch > 0.0 && !(self.v_catch > v_pi) {
            return Err(WaveformError::RegionOrdering(format!(
                "v_catch ({} V) must exceed V_pi ({v_pi:.3} V)",
                self.v_catch
            )));
        }
        let used = self.release_start() + self.t_release_coast + self.t_catch;
        if used > self.period * (1.0 + 1e-12) {
            return Err(WaveformError::Invalid(format!(
                "regions span {used} s, longer than the period {} s",
                self.period
            )));
        }
        Ok(())
    }
}

/// Build the single-period program for `spec`; `v_pi` is the pull-in voltage
/// the region ordering is checked against.
pub fn engineered_waveform(spec: &EngineeredSpec, v_pi: f64, reps: u64) -> Result<Waveform, WaveformError> {
    spec.validate(v_pi)?;
    let used = spec.release_start() + spec.t_release_coast + spec.t_catch;
    let raw = Waveform {
        segments: vec![
            Segment::new(spec.v_kick, spec.t_kick),
            Segment::new(spec.v_coast, spec.t_coast),
            Segment::new(spec.v_hold, spec.t_hold),
            Segment::new(spec.v_release_coast, spec.t_release_coast),
            Segment::new(spec.v_catch, spec.t_catch),
            Segment::new(0.0, (spec.period - used).max(0.0)),
        ],
        period: spec.period,
        repetitions: reps,
    };
    let w = raw.normalized();
    w.validate()?;
    Ok(w)
}
