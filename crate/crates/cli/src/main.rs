use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use cryoswitch::calibrate::CalibrationTargets;
use cryoswitch::harness::cycle::CycleMode;
use cryoswitch::harness::presets::{self, PRESET_IDS};
use cryoswitch::harness::sweep::descending;
use cryoswitch::harness::{
    rerun_manifest, run_scenario, Check, GateKind, Scenario, ScenarioKind, ScenarioReport, SwitchState, WaveformChoice,
};
use cryoswitch::optimize::{ObjectiveWeights, OptimizerOptions};
use cryoswitch::waveform::{EngineeredSpec, Waveform};

#[derive(Parser)]
#[command(name = "cryoswitch", version, about = "Cryogenic RF-MEMS switch simulator")]
struct Cli {
    /// Switch parameter JSON; defaults to the built-in calibrated set.
    #[arg(long, global = true)]
    params: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps and optimizer batches (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Wave {
    Square,
    Engineered,
    /// Single 400 us pulse at 90 V.
    Bounce,
}

#[derive(Clone, Copy, ValueEnum)]
enum StateArg {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum GateArg {
    Nand,
    Nor,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Reset,
    Carry,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit the default parameter set and write params.default.json.
    Calibrate,
    /// Time-domain run of one gate program.
    Simulate {
        #[arg(long, default_value_t = 295.0)]
        temp_k: f64,
        #[arg(long, value_enum, default_value_t = Wave::Square)]
        waveform: Wave,
        /// Custom waveform JSON; overrides --waveform.
        #[arg(long)]
        waveform_file: Option<PathBuf>,
        #[arg(long, default_value_t = 90.0)]
        voltage: f64,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Also run the bounce pulse and report the impact ratio.
        #[arg(long)]
        compare: bool,
    },
    /// Bounce and damping summary over a descending temperature grid.
    SweepTemp {
        #[arg(long, default_value_t = 100.0)]
        from: f64,
        #[arg(long, default_value_t = 10.0)]
        to: f64,
        #[arg(long, default_value_t = 5.0)]
        step: f64,
    },
    /// Quasi-static deflection sweep and pull-in voltage.
    Pullin {
        #[arg(long, value_delimiter = ',', default_values_t = [295.0, 5.8])]
        temps: Vec<f64>,
        #[arg(long, default_value_t = 0.05)]
        v_step: f64,
    },
    /// Two-port S-parameters across a band.
    Rf {
        #[arg(long, value_enum)]
        state: StateArg,
        #[arg(long, value_delimiter = ',', default_values_t = [295.0, 5.8])]
        temp_k: Vec<f64>,
        /// Band edges in GHz, `lo,hi`.
        #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [4.0, 8.0])]
        band: Vec<f64>,
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Soft-landing search over kick/coast timing and coast voltage.
    Optimize {
        #[arg(long, default_value_t = 5.8)]
        temp_k: f64,
        #[arg(long)]
        max_evals: Option<usize>,
    },
    /// NAND/NOR truth table and transient.
    Logic {
        #[arg(long, value_enum)]
        gate: GateArg,
        #[arg(long, default_value_t = 295.0)]
        temp_k: f64,
        #[arg(long, default_value_t = 10e3)]
        freq_hz: f64,
    },
    /// SP4T routing with one gate asserted.
    Route {
        #[arg(long)]
        gate: usize,
        #[arg(long, default_value_t = 295.0)]
        temp_k: f64,
        #[arg(long, default_value_t = 1.0)]
        input_v: f64,
    },
    /// Repeated actuation with per-decade sampling.
    Cycle {
        #[arg(long, default_value_t = 10_000)]
        n: u64,
        #[arg(long, default_value_t = 295.0)]
        temp_k: f64,
        #[arg(long, value_enum, default_value_t = Wave::Square)]
        waveform: Wave,
        #[arg(long, value_enum, default_value_t = ModeArg::Reset)]
        mode: ModeArg,
    },
    /// Actuation power of N switches against a cooling budget.
    Budget {
        #[arg(long, default_value_t = 32)]
        n: u64,
        #[arg(long, default_value_t = 90.0)]
        voltage: f64,
        #[arg(long, default_value_t = 10e3)]
        freq_hz: f64,
        #[arg(long, default_value_t = 20e-6)]
        budget_w: f64,
    },
    /// Run a named preset (`all` runs every one).
    Repro { id: String },
    /// Run a scenario JSON file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Re-run the scenario recorded in a manifest.
    Rerun {
        #[arg(long)]
        manifest: PathBuf,
    },
}

fn wave(w: Wave, voltage: f64) -> WaveformChoice {
    match w {
        Wave::Square => WaveformChoice::Square { voltage, t_on: 50e-6, period: 100e-6, reps: 1 },
        Wave::Engineered => WaveformChoice::Engineered { spec: EngineeredSpec::dual_pulse_defaults(), reps: 1 },
        Wave::Bounce => WaveformChoice::BouncePulse,
    }
}

fn scenario(cmd: Cmd) -> Result<Vec<Scenario>> {
    let one = |k| Ok(vec![Scenario::new(k)]);
    match cmd {
        Cmd::Calibrate => one(ScenarioKind::Calibrate { targets: CalibrationTargets::default() }),
        Cmd::Simulate { temp_k, waveform, waveform_file, voltage, t_end, dt, compare } => {
            let waveform = match waveform_file {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).with_context(|| path.display().to_string())?;
                    let w: Waveform = serde_json::from_str(&text).with_context(|| path.display().to_string())?;
                    WaveformChoice::Custom { waveform: w }
                }
                None => wave(waveform, voltage),
            };
            one(ScenarioKind::Transient {
                waveform,
                temperature: temp_k,
                t_end,
                dt,
                record_stride: None,
                compare_square: compare,
            })
        }
        Cmd::SweepTemp { from, to, step } => {
            if !(step > 0.0 && from >= to) {
                bail!("need from >= to and step > 0");
            }
            one(ScenarioKind::TempSweep { temperatures: descending(from, to, step) })
        }
        Cmd::Pullin { temps, v_step } => one(ScenarioKind::PullinSweep { temperatures: temps, v_max: None, v_step }),
        Cmd::Rf { state, temp_k, band, points } => one(ScenarioKind::Rf {
            state: match state {
                StateArg::On => SwitchState::On,
                StateArg::Off => SwitchState::Off,
            },
            temperatures: temp_k,
            f_lo: band[0] * 1e9,
            f_hi: band[1] * 1e9,
            n: points,
        }),
        Cmd::Optimize { temp_k, max_evals } => {
            let mut options = OptimizerOptions::default();
            if let Some(m) = max_evals {
                options.max_evals = m;
            }
            Ok(vec![Scenario::new(ScenarioKind::Optimize {
                temperature: temp_k,
                template: EngineeredSpec::dual_pulse_defaults(),
                free: cryoswitch::harness::default_free(&Default::default(), temp_k),
                weights: ObjectiveWeights::default(),
                options,
            })
            .with_checks(vec![Check::at_least("improvement", 0.0)])])
        }
        Cmd::Logic { gate, temp_k, freq_hz } => one(ScenarioKind::Logic {
            gate: match gate {
                GateArg::Nand => GateKind::Nand,
                GateArg::Nor => GateKind::Nor,
            },
            temperature: temp_k,
            freq_hz,
            voltage: 90.0,
        }),
        Cmd::Route { gate, temp_k, input_v } => one(ScenarioKind::Route { gate, temperature: temp_k, input_v }),
        Cmd::Cycle { n, temp_k, waveform, mode } => one(ScenarioKind::Cycle {
            n_cycles: n,
            waveform: wave(waveform, 90.0),
            temperature: temp_k,
            sample_decades: true,
            mode: match mode {
                ModeArg::Reset => CycleMode::Reset,
                ModeArg::Carry => CycleMode::Carry,
            },
        }),
        Cmd::Budget { n, voltage, freq_hz, budget_w } => {
            Ok(vec![Scenario::new(ScenarioKind::Budget { n_switches: n, voltage, freq_hz, budget_w })
                .with_checks(vec![Check::at_least("pass", 1.0)])])
        }
        Cmd::Repro { id } => {
            if id == "all" {
                Ok(PRESET_IDS.iter().map(|i| presets::preset(i).expect("listed id")).collect())
            } else {
                match presets::preset(&id) {
                    Some(s) => Ok(vec![s]),
                    None => bail!("unknown preset `{id}`; known: {}", PRESET_IDS.join(", ")),
                }
            }
        }
        Cmd::Run { config } => Ok(vec![Scenario::load(&config)?]),
        Cmd::Rerun { .. } => unreachable!("handled before dispatch"),
    }
}

fn print_report(r: &ScenarioReport) {
    println!("[{}] -> {}", r.label, r.output_dir.display());
    for (k, v) in &r.metrics {
        println!("  {k:<36} {v:.6e}");
    }
    for c in &r.checks {
        let bound = match (c.min, c.max) {
            (Some(a), Some(b)) => format!("in [{a:e}, {b:e}]"),
            (Some(a), None) => format!(">= {a:e}"),
            (None, Some(b)) => format!("<= {b:e}"),
            (None, None) => "present".into(),
        };
        let v = c.value.map_or("missing".into(), |v| format!("{v:.6e}"));
        println!("  {} {} = {v} {bound}", if c.passed { "PASS" } else { "FAIL" }, c.metric);
    }
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring worker pool")?;
    }
    let out = cli.out.clone();
    let reports = if let Cmd::Rerun { manifest } = &cli.cmd {
        let dir = out.clone().unwrap_or_else(|| PathBuf::from("out/rerun"));
        vec![rerun_manifest(manifest, &dir)?]
    } else {
        let is_run = matches!(cli.cmd, Cmd::Run { .. });
        let scenarios = scenario(cli.cmd)?;
        let many = scenarios.len() > 1;
        let mut reports = Vec::new();
        for mut s in scenarios {
            if let Some(p) = &cli.params {
                s.params_ref = Some(p.clone());
                s.params = None;
            }
            if let Some(o) = &out {
                s.output_dir = if many { o.join(s.label()) } else { o.clone() };
            } else if !is_run {
                s.output_dir = PathBuf::from("out").join(s.label());
            }
            reports.push(run_scenario(&s)?);
        }
        reports
    };
    let mut ok = true;
    for r in &reports {
        print_report(r);
        ok &= r.passed();
    }
    Ok(ok)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
