//! Scenario configuration, execution and report emission.
//!
//! A scenario is one JSON document naming a `kind` plus kind-specific fields.
//! Running it writes CSV/JSON artifacts and a `manifest.json` that records the
//! resolved inputs, their hashes and the output hashes, so a run can be
//! repeated from the manifest alone.

pub mod cycle;
pub mod presets;
pub mod sweep;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::calibrate::{self, bounce_config, bounce_pulse, CalibrationTargets, BOUNCE_WINDOW, DRIVE_VOLTAGE};
use crate::dynamics::{self, SimConfig};
use crate::model;
use crate::network::{self, LogicCircuit, SP4TDevice};
use crate::optimize::{self, FreeParam, ObjectiveWeights, OptimizerOptions, Param};
use crate::params::{Environment, SwitchParams};
use crate::rf;
use crate::waveform::{self, actuation_power, EngineeredSpec, Waveform};

pub use cycle::{cycling_test, CycleMode, CycleReport};
pub use sweep::{temperature_sweep, TempSweepReport};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("cannot access {}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("scenario `{scenario}` failed")]
    Module { scenario: String, source: Box<dyn std::error::Error + Send + Sync> },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.to_path_buf(), source }
}

/// Partial overrides applied on top of [`Environment::default`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvOverrides {
    pub pressure_ref: Option<f64>,
    pub t_condense_o2: Option<f64>,
    pub t_condense_n2: Option<f64>,
    pub o2_fraction: Option<f64>,
    pub residual_pressure_fraction: Option<f64>,
}

impl EnvOverrides {
    pub fn apply(&self, t: f64) -> Environment {
        let d = Environment::at(t);
        Environment {
            temperature: t,
            pressure_ref: self.pressure_ref.unwrap_or(d.pressure_ref),
            t_condense_o2: self.t_condense_o2.unwrap_or(d.t_condense_o2),
            t_condense_n2: self.t_condense_n2.unwrap_or(d.t_condense_n2),
            o2_fraction: self.o2_fraction.unwrap_or(d.o2_fraction),
            residual_pressure_fraction: self.residual_pressure_fraction.unwrap_or(d.residual_pressure_fraction),
        }
    }
}

/// Gate program of a transient or cycling scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum WaveformChoice {
    Square {
        voltage: f64,
        t_on: f64,
        period: f64,
        #[serde(default = "one")]
        reps: u64,
    },
    /// Engineered program; missing fields take the dual-pulse defaults.
    Engineered {
        #[serde(default = "EngineeredSpec::dual_pulse_defaults")]
        spec: EngineeredSpec,
        #[serde(default = "one")]
        reps: u64,
    },
    /// Single long 90 V pulse used for bounce characterisation.
    BouncePulse,
    Custom {
        waveform: Waveform,
    },
}

fn one() -> u64 {
    1
}

impl WaveformChoice {
    pub fn build(&self, p: &SwitchParams, t: f64) -> Result<Waveform, Box<dyn std::error::Error + Send + Sync>> {
        Ok(match self {
            WaveformChoice::Square { voltage, t_on, period, reps } => {
                waveform::square_pulse(*voltage, *t_on, *period, *reps)?
            }
            WaveformChoice::Engineered { spec, reps } => {
                waveform::engineered_waveform(spec, model::pull_in_voltage(p, t)?, *reps)?
            }
            WaveformChoice::BouncePulse => bounce_pulse(),
            WaveformChoice::Custom { waveform } => {
                waveform.validate()?;
                waveform.clone()
            }
        })
    }

    /// The default dual-pulse program with its hold stretched over the
    /// bounce window, for comparison with [`WaveformChoice::BouncePulse`].
    pub fn engineered_long() -> Self {
        let d = EngineeredSpec::dual_pulse_defaults();
        let spec = EngineeredSpec { t_hold: BOUNCE_WINDOW - d.t_kick - d.t_coast, period: 2.0 * BOUNCE_WINDOW, ..d };
        WaveformChoice::Engineered { spec, reps: 1 }
    }

    pub fn square_10khz() -> Self {
        WaveformChoice::Square { voltage: DRIVE_VOLTAGE, t_on: 50e-6, period: 100e-6, reps: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchState {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    Nand,
    Nor,
}

fn d_temp() -> f64 {
    295.0
}
fn d_temps() -> Vec<f64> {
    vec![295.0, 5.8]
}
fn d_v_step() -> f64 {
    0.05
}
fn d_f_lo() -> f64 {
    rf::BAND_LO
}
fn d_f_hi() -> f64 {
    rf::BAND_HI
}
fn d_n() -> usize {
    101
}
fn d_freq() -> f64 {
    10e3
}
fn d_voltage() -> f64 {
    DRIVE_VOLTAGE
}
fn d_input() -> f64 {
    1.0
}
fn d_cycles() -> u64 {
    10_000
}
fn d_true() -> bool {
    true
}
fn d_switches() -> u64 {
    32
}
fn d_budget() -> f64 {
    20e-6
}
fn d_cryo() -> f64 {
    5.8
}
fn d_free() -> Vec<FreeParam> {
    default_free(&SwitchParams::default(), 5.8)
}

/// `t_kick`, `v_coast`, `t_coast` boxes for the soft-landing search.
pub fn default_free(p: &SwitchParams, t: f64) -> Vec<FreeParam> {
    let v_pi = model::pull_in_voltage(p, t).unwrap_or(DRIVE_VOLTAGE);
    vec![
        FreeParam::new(Param::TKick, 1.0e-6, 3.0e-6),
        FreeParam::new(Param::VCoast, 0.0, v_pi - 0.5),
        FreeParam::new(Param::TCoast, 0.2e-6, 4.0e-6),
    ]
}

/// Kind-specific part of a scenario. In JSON the variant name sits in the
/// scenario's `kind` field and the variant fields sit beside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioKind {
    Transient {
        waveform: WaveformChoice,
        #[serde(default = "d_temp")]
        temperature: f64,
        t_end: Option<f64>,
        dt: Option<f64>,
        record_stride: Option<usize>,
        /// Also run the bounce pulse at the same temperature and report ratios.
        #[serde(default)]
        compare_square: bool,
    },
    TempSweep {
        temperatures: Vec<f64>,
    },
    PullinSweep {
        #[serde(default = "d_temps")]
        temperatures: Vec<f64>,
        v_max: Option<f64>,
        #[serde(default = "d_v_step")]
        v_step: f64,
    },
    Rf {
        state: SwitchState,
        #[serde(default = "d_temps")]
        temperatures: Vec<f64>,
        #[serde(default = "d_f_lo")]
        f_lo: f64,
        #[serde(default = "d_f_hi")]
        f_hi: f64,
        #[serde(default = "d_n")]
        n: usize,
    },
    Optimize {
        #[serde(default = "d_cryo")]
        temperature: f64,
        #[serde(default = "EngineeredSpec::dual_pulse_defaults")]
        template: EngineeredSpec,
        #[serde(default = "d_free")]
        free: Vec<FreeParam>,
        #[serde(default)]
        weights: ObjectiveWeights,
        #[serde(default)]
        options: OptimizerOptions,
    },
    Logic {
        gate: GateKind,
        #[serde(default = "d_temp")]
        temperature: f64,
        #[serde(default = "d_freq")]
        freq_hz: f64,
        #[serde(default = "d_voltage")]
        voltage: f64,
    },
    Route {
        gate: usize,
        #[serde(default = "d_temp")]
        temperature: f64,
        #[serde(default = "d_input")]
        input_v: f64,
    },
    Cycle {
        #[serde(default = "d_cycles")]
        n_cycles: u64,
        waveform: WaveformChoice,
        #[serde(default = "d_temp")]
        temperature: f64,
        #[serde(default = "d_true")]
        sample_decades: bool,
        #[serde(default)]
        mode: CycleMode,
    },
    Budget {
        #[serde(default = "d_switches")]
        n_switches: u64,
        #[serde(default = "d_voltage")]
        voltage: f64,
        #[serde(default = "d_freq")]
        freq_hz: f64,
        #[serde(default = "d_budget")]
        budget_w: f64,
    },
    Calibrate {
        #[serde(default)]
        targets: CalibrationTargets,
    },
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Transient { .. } => "transient",
            ScenarioKind::TempSweep { .. } => "temp_sweep",
            ScenarioKind::PullinSweep { .. } => "pullin_sweep",
            ScenarioKind::Rf { .. } => "rf",
            ScenarioKind::Optimize { .. } => "optimize",
            ScenarioKind::Logic { .. } => "logic",
            ScenarioKind::Route { .. } => "route",
            ScenarioKind::Cycle { .. } => "cycle",
            ScenarioKind::Budget { .. } => "budget",
            ScenarioKind::Calibrate { .. } => "calibrate",
        }
    }
}

/// Inclusive bounds on one reported metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub metric: String,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

impl Check {
    pub fn range(metric: &str, min: f64, max: f64) -> Self {
        Check { metric: metric.into(), min: Some(min), max: Some(max) }
    }
    pub fn at_least(metric: &str, min: f64) -> Self {
        Check { metric: metric.into(), min: Some(min), max: None }
    }
    pub fn at_most(metric: &str, max: f64) -> Self {
        Check { metric: metric.into(), min: None, max: Some(max) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub metric: String,
    pub value: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: Option<String>,
    /// Parameter file; defaults to the built-in calibrated set.
    pub params_ref: Option<PathBuf>,
    /// Inline parameters (used by manifests); wins over `params_ref`.
    pub params: Option<SwitchParams>,
    pub env: EnvOverrides,
    pub output_dir: PathBuf,
    pub checks: Vec<Check>,
    pub kind: ScenarioKind,
}

/// Fields shared by every kind.
#[derive(Serialize, Deserialize)]
struct Common {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params_ref: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<SwitchParams>,
    #[serde(default)]
    env: EnvOverrides,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    #[serde(default)]
    checks: Vec<Check>,
}

const COMMON_KEYS: [&str; 6] = ["name", "params_ref", "params", "env", "output_dir", "checks"];

fn config_err<E: std::fmt::Display>(prefix: &str, e: serde_path_to_error::Error<E>) -> HarnessError {
    let path = e.path().to_string();
    let path = match (prefix.is_empty(), path.as_str()) {
        (true, _) => path,
        (false, ".") => prefix.to_string(),
        (false, _) => format!("{prefix}.{path}"),
    };
    HarnessError::Config { path, message: e.inner().to_string() }
}

impl Scenario {
    /// Split a flat JSON object into common fields and the `kind` variant,
    /// keeping field paths in diagnostics.
    pub fn from_value(v: serde_json::Value) -> Result<Scenario, HarnessError> {
        let serde_json::Value::Object(mut obj) = v else {
            return Err(HarnessError::Config { path: ".".into(), message: "scenario must be a JSON object".into() });
        };
        let kind = match obj.remove("kind") {
            Some(serde_json::Value::String(k)) => k,
            Some(_) => return Err(HarnessError::Config { path: "kind".into(), message: "expected a string".into() }),
            None => return Err(HarnessError::Config { path: "kind".into(), message: "missing field `kind`".into() }),
        };
        let mut common = serde_json::Map::new();
        for key in COMMON_KEYS {
            if let Some(v) = obj.remove(key) {
                common.insert(key.into(), v);
            }
        }
        let common: Common =
            serde_path_to_error::deserialize(serde_json::Value::Object(common)).map_err(|e| config_err("", e))?;
        let mut tagged = serde_json::Map::new();
        tagged.insert(kind, serde_json::Value::Object(obj));
        // Paths come back as `<kind>.<field>`; the kind segment is not a real key.
        let kind: ScenarioKind = serde_path_to_error::deserialize(serde_json::Value::Object(tagged)).map_err(|e| {
            let path = e.path().to_string();
            let field = match path.split_once('.') {
                Some((_, rest)) if !rest.is_empty() => rest.to_string(),
                Some(_) => "kind".to_string(),
                None => ".".to_string(),
            };
            HarnessError::Config { path: field, message: e.inner().to_string() }
        })?;
        Ok(Scenario {
            name: common.name,
            params_ref: common.params_ref,
            params: common.params,
            env: common.env,
            output_dir: common.output_dir,
            checks: common.checks,
            kind,
        })
    }

    pub fn to_value(&self) -> serde_json::Value {
        let common = Common {
            name: self.name.clone(),
            params_ref: self.params_ref.clone(),
            params: self.params,
            env: self.env,
            output_dir: self.output_dir.clone(),
            checks: self.checks.clone(),
        };
        let mut out = match serde_json::to_value(common).expect("plain data serializes") {
            serde_json::Value::Object(m) => m,
            _ => unreachable!("struct serializes to object"),
        };
        out.insert("kind".into(), self.kind.name().into());
        match serde_json::to_value(&self.kind).expect("plain data serializes") {
            serde_json::Value::Object(m) => {
                for (_, body) in m {
                    if let serde_json::Value::Object(fields) = body {
                        out.extend(fields);
                    }
                }
            }
            _ => unreachable!("struct variants serialize to objects"),
        }
        serde_json::Value::Object(out)
    }
}

impl Serialize for Scenario {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_value().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Scenario {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        Scenario::from_value(v).map_err(serde::de::Error::custom)
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Scenario {
    pub fn new(kind: ScenarioKind) -> Self {
        Scenario {
            name: None,
            params_ref: None,
            params: None,
            env: EnvOverrides::default(),
            output_dir: default_output_dir(),
            checks: Vec::new(),
            kind,
        }
    }

    pub fn with_checks(mut self, checks: Vec<Check>) -> Self {
        self.checks = checks;
        self
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind.name().to_string())
    }

    /// Parse with field-path diagnostics.
    pub fn from_json(text: &str) -> Result<Scenario, HarnessError> {
        let v: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| HarnessError::Config { path: ".".into(), message: e.to_string() })?;
        Scenario::from_value(v)
    }

    /// Load a scenario file; a relative `params_ref` or `output_dir` is resolved
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Scenario, HarnessError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let mut s = Scenario::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(r) = &s.params_ref {
            if r.is_relative() {
                s.params_ref = Some(base.join(r));
            }
        }
        if s.output_dir.is_relative() {
            s.output_dir = base.join(&s.output_dir);
        }
        Ok(s)
    }

    pub fn resolve_params(&self) -> Result<SwitchParams, HarnessError> {
        let p = if let Some(p) = self.params {
            p
        } else if let Some(path) = &self.params_ref {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            let de = &mut serde_json::Deserializer::from_str(&text);
            serde_path_to_error::deserialize(de).map_err(|e| config_err("params_ref", e))?
        } else {
            SwitchParams::default()
        };
        p.validate().map_err(|e| HarnessError::Config { path: "params".into(), message: e.to_string() })?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: Scenario,
    pub params: SwitchParams,
    pub scenario_sha256: String,
    pub params_sha256: String,
    /// File name -> SHA-256 of its bytes.
    pub outputs: BTreeMap<String, String>,
    pub metrics: BTreeMap<String, f64>,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
    pub crate_version: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub label: String,
    pub output_dir: PathBuf,
    pub metrics: BTreeMap<String, f64>,
    pub checks: Vec<CheckResult>,
    pub manifest: Manifest,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Hash of the inputs only; where the outputs go does not change them.
fn scenario_hash(s: &Scenario) -> String {
    let mut v = s.to_value();
    if let serde_json::Value::Object(m) = &mut v {
        m.remove("output_dir");
    }
    sha256_hex(&serde_json::to_vec(&v).expect("value serializes"))
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collected artifacts of one run, written by a single writer at the end.
struct Outputs {
    files: BTreeMap<String, Vec<u8>>,
    metrics: BTreeMap<String, f64>,
}

impl Outputs {
    fn new() -> Self {
        Outputs { files: BTreeMap::new(), metrics: BTreeMap::new() }
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut bytes = serde_json::to_vec_pretty(value).expect("report types serialize");
        bytes.push(b'\n');
        self.files.insert(name.into(), bytes);
    }

    fn csv<F>(&mut self, name: &str, write: F) -> Result<(), csv::Error>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<(), csv::Error>,
    {
        let mut buf = Vec::new();
        write(&mut buf)?;
        self.files.insert(name.into(), buf);
        Ok(())
    }

    fn metric(&mut self, key: impl Into<String>, v: f64) {
        self.metrics.insert(key.into(), v);
    }
}

type BoxErr = Box<dyn std::error::Error + Send + Sync>;
type GateFn = fn(bool, bool, &LogicCircuit, &SwitchParams, f64) -> Result<network::LogicLevel, network::NetworkError>;

fn tkey(t: f64) -> String {
    format!("{t}")
}

/// Execute `s`, write its artifacts and manifest into `s.output_dir`.
pub fn run_scenario(s: &Scenario) -> Result<ScenarioReport, HarnessError> {
    let params = s.resolve_params()?;
    let label = s.label();
    let mut out = Outputs::new();
    execute(s, &params, &mut out).map_err(|source| HarnessError::Module { scenario: label.clone(), source })?;

    let checks: Vec<CheckResult> = s
        .checks
        .iter()
        .map(|c| {
            let value = out.metrics.get(&c.metric).copied();
            let passed =
                value.is_some_and(|v| !v.is_nan() && c.min.is_none_or(|m| v >= m) && c.max.is_none_or(|m| v <= m));
            CheckResult { metric: c.metric.clone(), value, min: c.min, max: c.max, passed }
        })
        .collect();

    let embedded = Scenario { params: Some(params), params_ref: None, ..s.clone() };
    let manifest = Manifest {
        scenario_sha256: scenario_hash(&embedded),
        params_sha256: sha256_hex(&serde_json::to_vec(&params).expect("params serialize")),
        scenario: embedded,
        params,
        outputs: out.files.iter().map(|(k, v)| (k.clone(), sha256_hex(v))).collect(),
        metrics: out.metrics.clone(),
        passed: checks.iter().all(|c| c.passed),
        checks: checks.clone(),
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
    };

    let dir = &s.output_dir;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for (name, bytes) in &out.files {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(io_err(&path))?;
    }
    let mpath = dir.join("manifest.json");
    let mut mbytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    mbytes.push(b'\n');
    fs::write(&mpath, mbytes).map_err(io_err(&mpath))?;

    Ok(ScenarioReport { label, output_dir: dir.clone(), metrics: out.metrics, checks, manifest })
}

/// Re-run the scenario recorded in a manifest into `output_dir`.
pub fn rerun_manifest(manifest_path: &Path, output_dir: &Path) -> Result<ScenarioReport, HarnessError> {
    let text = fs::read_to_string(manifest_path).map_err(io_err(manifest_path))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let m: Manifest = serde_path_to_error::deserialize(de).map_err(|e| config_err("", e))?;
    let s = Scenario { output_dir: output_dir.to_path_buf(), params: Some(m.params), ..m.scenario };
    run_scenario(&s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub per_switch_w: f64,
    pub n_switches: u64,
    pub total_w: f64,
    pub budget_w: f64,
    pub pass: bool,
}

pub fn budget_report(p: &SwitchParams, n_switches: u64, voltage: f64, freq_hz: f64, budget_w: f64) -> BudgetReport {
    let per = actuation_power(p.gate_capacitance_closed, voltage, freq_hz);
    let total = per * n_switches as f64;
    BudgetReport { per_switch_w: per, n_switches, total_w: total, budget_w, pass: total <= budget_w }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub in1: bool,
    pub in2: bool,
    pub v_out: f64,
    pub bit: bool,
    pub expected: bool,
}

fn execute(s: &Scenario, p: &SwitchParams, out: &mut Outputs) -> Result<(), BoxErr> {
    match &s.kind {
        ScenarioKind::Transient { waveform, temperature, t_end, dt, record_stride, compare_square } => {
            let env = s.env.apply(*temperature);
            let w = waveform.build(p, *temperature)?;
            let default_end = if matches!(waveform, WaveformChoice::BouncePulse) { BOUNCE_WINDOW } else { w.span() };
            let mut cfg = SimConfig::new(t_end.unwrap_or(default_end));
            if let Some(dt) = dt {
                cfg.dt = *dt;
            }
            if let Some(r) = record_stride {
                cfg.record_stride = *r;
            }
            let tr = dynamics::simulate_transient(p, &env, &w, &cfg)?;
            let summary = tr.summary();
            out.csv("trace.csv", |b| tr.write_csv(b))?;
            out.json("trace_summary.json", &summary);
            let m = summary.bounce_metrics;
            out.metric("switching_time_s", summary.switching_time.seconds().unwrap_or(f64::NAN));
            out.metric("closed", summary.switching_time.seconds().map_or(0.0, |_| 1.0));
            out.metric("bounce_count", m.bounce_count as f64);
            out.metric("first_impact_velocity_mps", m.first_impact_velocity);
            out.metric("ring_down_s", m.ring_down_duration);
            out.metric("settle_time_s", m.settle_time);
            if *compare_square {
                let sq = dynamics::simulate_transient(p, &env, &bounce_pulse(), &bounce_config())?;
                let ms = dynamics::bounce_metrics(&sq);
                out.metric("square_first_impact_velocity_mps", ms.first_impact_velocity);
                out.metric("square_bounce_count", ms.bounce_count as f64);
                out.metric("impact_reduction", ms.first_impact_velocity / m.first_impact_velocity);
            }
        }
        ScenarioKind::TempSweep { temperatures } => {
            if temperatures.is_empty() {
                return Err("temperatures must be nonempty".into());
            }
            let env = s.env.apply(295.0);
            let r = temperature_sweep(p, &env, temperatures)?;
            out.csv("temp_sweep.csv", |b| {
                let mut w = csv::Writer::from_writer(b);
                w.write_record([
                    "temperature_k",
                    "pressure_pa",
                    "damping_nsm",
                    "contact_damping_nsm",
                    "bounce_count",
                    "ring_down_s",
                    "pull_in_v",
                    "r_on_ohm",
                ])?;
                for pt in &r.points {
                    w.serialize((
                        pt.temperature,
                        pt.pressure,
                        pt.damping,
                        pt.contact_damping,
                        pt.bounce_count,
                        pt.ring_down,
                        pt.pull_in_voltage,
                        pt.on_resistance,
                    ))?;
                }
                w.flush()?;
                Ok(())
            })?;
            out.json("temp_sweep.json", &r);
            out.metric("onset_k", r.onset.unwrap_or(f64::NAN));
            for pt in &r.points {
                out.metric(format!("bounce_count@{}", tkey(pt.temperature)), pt.bounce_count as f64);
                out.metric(format!("ring_down_s@{}", tkey(pt.temperature)), pt.ring_down);
            }
        }
        ScenarioKind::PullinSweep { temperatures, v_max, v_step } => {
            let mut rows = Vec::new();
            let mut first = None;
            for &t in temperatures {
                let env = s.env.apply(t);
                let closed = model::pull_in_voltage(p, t)?;
                let vmax = v_max.unwrap_or(1.2 * model::pull_in_voltage(p, 295.0)?);
                let sw = dynamics::quasi_static_sweep(p, &env, vmax, *v_step)?;
                let numeric = sw.pull_in_voltage.unwrap_or(f64::NAN);
                let base = *first.get_or_insert(numeric);
                out.metric(format!("v_pi_numeric@{}", tkey(t)), numeric);
                out.metric(format!("v_pi_closed@{}", tkey(t)), closed);
                out.metric(format!("ratio@{}", tkey(t)), numeric / base);
                out.metric(format!("closed_ratio@{}", tkey(t)), closed / model::pull_in_voltage(p, temperatures[0])?);
                out.metric(format!("oracle_error@{}", tkey(t)), (numeric - closed).abs() / closed);
                for pt in &sw.points {
                    rows.push((t, pt.voltage, pt.deflection.unwrap_or(f64::NAN)));
                }
            }
            out.csv("pullin_sweep.csv", |b| {
                let mut w = csv::Writer::from_writer(b);
                w.write_record(["temperature_k", "v_gate", "x_m"])?;
                for r in &rows {
                    w.serialize(r)?;
                }
                w.flush()?;
                Ok(())
            })?;
        }
        ScenarioKind::Rf { state, temperatures, f_lo, f_hi, n } => {
            if !(f_lo < f_hi) {
                return Err("f_lo must be below f_hi".into());
            }
            for &t in temperatures {
                let (pts, tag) = match state {
                    SwitchState::On => (rf::insertion_loss_sweep(p, t, *f_lo, *f_hi, *n), "on"),
                    SwitchState::Off => (rf::isolation_sweep(p, t, *f_lo, *f_hi, *n), "off"),
                };
                out.csv(&format!("rf_{tag}_{}K.csv", tkey(t)), |b| rf::write_csv(&pts, b))?;
                let worst_loss = pts.iter().map(|q| q.insertion_loss_db()).fold(f64::NEG_INFINITY, f64::max);
                let worst_iso = pts.iter().map(|q| q.isolation_db()).fold(f64::INFINITY, f64::min);
                match state {
                    SwitchState::On => out.metric(format!("max_loss_db@{}", tkey(t)), worst_loss),
                    SwitchState::Off => out.metric(format!("min_isolation_db@{}", tkey(t)), worst_iso),
                }
            }
        }
        ScenarioKind::Optimize { temperature, template, free, weights, options } => {
            let env = s.env.apply(*temperature);
            let r = optimize::optimize_waveform(p, &env, template, free, weights, options)?;
            let sq = dynamics::simulate_transient(p, &env, &bounce_pulse(), &bounce_config())?;
            let v_sq = dynamics::bounce_metrics(&sq).first_impact_velocity;
            out.json("optimized_spec.json", &r.spec);
            out.json("optimize_report.json", &r);
            out.csv("optimize_history.csv", |b| r.write_history_csv(b))?;
            out.metric("objective", r.objective);
            out.metric("template_objective", r.template_objective);
            out.metric("improvement", r.template_objective - r.objective);
            out.metric("impact_velocity_mps", r.metrics.impact_velocity);
            out.metric("impact_reduction", v_sq / r.metrics.impact_velocity);
            out.metric("t_close_s", r.metrics.t_close.unwrap_or(f64::NAN));
        }
        ScenarioKind::Logic { gate, temperature, freq_hz, voltage } => {
            let env = s.env.apply(*temperature);
            let (c, f): (LogicCircuit, GateFn) = match gate {
                GateKind::Nand => (LogicCircuit::nand(), network::nand),
                GateKind::Nor => (LogicCircuit::nor(), network::nor),
            };
            let mut table = Vec::new();
            let mut ok = true;
            for (a, b) in [(false, false), (false, true), (true, false), (true, true)] {
                let lvl = f(a, b, &c, p, *temperature)?;
                let expected = match gate {
                    GateKind::Nand => !(a && b),
                    GateKind::Nor => !(a || b),
                };
                ok &= lvl.bit == expected;
                table.push(TruthRow { in1: a, in2: b, v_out: lvl.v_out, bit: lvl.bit, expected });
            }
            out.json("truth_table.json", &table);
            out.metric("truth_table_ok", if ok { 1.0 } else { 0.0 });

            let period = 1.0 / freq_hz;
            let w = waveform::square_pulse(*voltage, 0.5 * period, period, 1)?;
            let cfg = SimConfig::new(period);
            let lt = network::logic_transient(&c, [&w, &w], p, &env, &cfg)?;
            out.csv("logic_transient.csv", |b| lt.write_csv(b))?;
            let single = dynamics::simulate_transient(p, &env, &w, &SimConfig { record_stride: 100, ..cfg })?;
            let ts = dynamics::switching_time(&single).seconds().unwrap_or(f64::NAN);
            let fall = lt.crossings().into_iter().find(|(_, rising)| !rising).map_or(f64::NAN, |(t, _)| t);
            let edge = dynamics::first_rising_edge(&w).unwrap_or(0.0);
            out.metric("switching_time_s", ts);
            out.metric("output_lag_s", fall - edge);
            out.metric("lag_ratio", (fall - edge) / ts);
            out.metric("output_transitions", lt.crossings().len() as f64);
        }
        ScenarioKind::Route { gate, temperature, input_v } => {
            if !(1..=4).contains(gate) {
                return Err(format!("gate must be 1..=4, got {gate}").into());
            }
            let mut dev = SP4TDevice::new(*p, *temperature).select(gate - 1);
            dev.input = network::Signal::Constant(*input_v);
            let r = network::route(&dev, 0.0)?;
            out.csv("route.csv", |b| network::write_route_csv(&[r], b))?;
            out.json("route.json", &r);
            for i in 0..4 {
                out.metric(format!("out{}", i + 1), r.divided[i]);
            }
            let above = r.divided.iter().filter(|&&v| v > 0.5 * input_v).count();
            out.metric("exclusive", if above == 1 && !r.multi_assert { 1.0 } else { 0.0 });
        }
        ScenarioKind::Cycle { n_cycles, waveform, temperature, sample_decades, mode } => {
            let env = s.env.apply(*temperature);
            let w = waveform.build(p, *temperature)?;
            let r = cycling_test(p, &env, &w, *n_cycles, *sample_decades, *mode, &cycle::identity_hook)?;
            out.json("cycle_report.json", &r);
            out.metric("cycles_run", r.cycles_run as f64);
            out.metric("max_relative_drift", r.max_relative_drift);
            out.metric("all_closed", if r.first_failure.is_none() { 1.0 } else { 0.0 });
            out.metric("simulated_cycles", r.simulated_cycles as f64);
        }
        ScenarioKind::Budget { n_switches, voltage, freq_hz, budget_w } => {
            let r = budget_report(p, *n_switches, *voltage, *freq_hz, *budget_w);
            out.json("budget.json", &r);
            out.metric("per_switch_w", r.per_switch_w);
            out.metric("total_w", r.total_w);
            out.metric("pass", if r.pass { 1.0 } else { 0.0 });
        }
        ScenarioKind::Calibrate { targets } => {
            let r = calibrate::calibrate_with_report(targets)?;
            let mut bytes = r.params.to_json_pretty().into_bytes();
            bytes.push(b'\n');
            out.files.insert("params.default.json".into(), bytes);
            out.json("calibration_report.json", &r);
            out.metric("pull_in_295_v", r.pull_in_295);
            out.metric("switching_time_s", r.switching_time);
            out.metric("ring_down_s", r.ring_down);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_scenario() {
        let s = Scenario::from_json(r#"{"kind": "budget"}"#).unwrap();
        assert!(matches!(s.kind, ScenarioKind::Budget { n_switches: 32, .. }));
        assert_eq!(s.output_dir, PathBuf::from("out"));
    }

    #[test]
    fn reports_field_path() {
        let path = |text: &str| match Scenario::from_json(text).unwrap_err() {
            HarnessError::Config { path, .. } => path,
            other => panic!("{other}"),
        };
        assert_eq!(path(r#"{"kind": "budget", "env": {"pressure_ref": "high"}}"#), "env.pressure_ref");
        assert_eq!(path(r#"{"kind": "rf", "state": "sideways"}"#), "state");
        assert_eq!(path(r#"{"kind": "budget", "n_switches": -1}"#), "n_switches");
        assert_eq!(path(r#"{"kind": "transient", "waveform": {"type": "square", "voltage": 1}}"#), "waveform");
        assert_eq!(path(r#"{"kind": "warp"}"#), "kind");
        assert_eq!(path(r#"{"kind": "transient"}"#), ".");
        assert_eq!(path(r#"{"checks": []}"#), "kind");
    }

    #[test]
    fn rejects_unknown_kind_field() {
        assert!(Scenario::from_json(r#"{"kind": "budget", "n_swiches": 4}"#).is_err());
    }

    #[test]
    fn empty_overrides_are_defaults() {
        assert_eq!(EnvOverrides::default().apply(77.0), Environment::at(77.0));
    }

    #[test]
    fn budget_values() {
        let r = budget_report(&SwitchParams::default(), 32, 90.0, 10e3, 20e-6);
        assert!((r.total_w - 15.552e-6).abs() < 1e-12);
        assert!(r.pass);
    }
}
