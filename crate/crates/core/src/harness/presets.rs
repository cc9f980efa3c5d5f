//! Named scenarios with their expected outcomes as checks.

use super::{Check, GateKind, Scenario, ScenarioKind, SwitchState, WaveformChoice};
use crate::harness::sweep::descending;
use crate::harness::CycleMode;
use crate::optimize::{ObjectiveWeights, OptimizerOptions};
use crate::waveform::EngineeredSpec;

pub const PRESET_IDS: [&str; 11] =
    ["fig2c", "fig2e", "fig2f", "fig3b", "fig3d", "fig3f", "fig4", "fig5", "fig6c", "fig6f", "suppfig2"];

pub fn preset(id: &str) -> Option<Scenario> {
    let s = match id {
        "fig2c" => {
            Scenario::new(ScenarioKind::PullinSweep { temperatures: vec![295.0, 5.8], v_max: None, v_step: 0.05 })
                .with_checks(vec![Check::range("ratio@5.8", 0.964, 0.974), Check::at_most("oracle_error@5.8", 0.01)])
        }
        "fig2e" => Scenario::new(ScenarioKind::Rf {
            state: SwitchState::On,
            temperatures: vec![295.0, 5.8],
            f_lo: 4e9,
            f_hi: 8e9,
            n: 101,
        })
        .with_checks(vec![Check::at_most("max_loss_db@295", 0.5), Check::at_most("max_loss_db@5.8", 0.5)]),
        "fig2f" => Scenario::new(ScenarioKind::Rf {
            state: SwitchState::Off,
            temperatures: vec![295.0, 5.8],
            f_lo: 4e9,
            f_hi: 8e9,
            n: 101,
        })
        .with_checks(vec![
            Check::at_least("min_isolation_db@295", 35.0),
            Check::at_least("min_isolation_db@5.8", 35.0),
        ]),
        "fig3b" => Scenario::new(ScenarioKind::Transient {
            waveform: WaveformChoice::square_10khz(),
            temperature: 295.0,
            t_end: None,
            dt: None,
            record_stride: None,
            compare_square: false,
        })
        .with_checks(vec![Check::range("switching_time_s", 2.565e-6, 2.835e-6), Check::at_most("bounce_count", 1.0)]),
        "fig3d" => Scenario::new(ScenarioKind::Transient {
            waveform: WaveformChoice::BouncePulse,
            temperature: 5.8,
            t_end: None,
            dt: None,
            record_stride: None,
            compare_square: false,
        })
        .with_checks(vec![Check::at_least("bounce_count", 5.0), Check::range("ring_down_s", 75e-6, 300e-6)]),
        "fig3f" => Scenario::new(ScenarioKind::Transient {
            waveform: WaveformChoice::engineered_long(),
            temperature: 5.8,
            t_end: None,
            dt: None,
            record_stride: None,
            compare_square: true,
        })
        .with_checks(vec![
            Check::range("switching_time_s", 2.805e-6, 3.795e-6),
            Check::at_least("impact_reduction", 10.0),
            Check::at_most("bounce_count", 1.0),
        ]),
        "fig4" => Scenario::new(ScenarioKind::Cycle {
            n_cycles: 1000,
            waveform: WaveformChoice::Engineered { spec: EngineeredSpec::dual_pulse_defaults(), reps: 1 },
            temperature: 5.8,
            sample_decades: true,
            mode: CycleMode::Reset,
        })
        .with_checks(vec![Check::at_most("max_relative_drift", 0.0), Check::at_least("all_closed", 1.0)]),
        "fig5" => Scenario::new(ScenarioKind::Route { gate: 1, temperature: 5.8, input_v: 1.0 }).with_checks(vec![
            Check::range("out1", 0.9, 1.0),
            Check::at_most("out2", 0.1),
            Check::at_most("out3", 0.1),
            Check::at_most("out4", 0.1),
            Check::at_least("exclusive", 1.0),
        ]),
        "fig6c" => {
            Scenario::new(ScenarioKind::Logic { gate: GateKind::Nand, temperature: 5.8, freq_hz: 10e3, voltage: 90.0 })
                .with_checks(vec![Check::at_least("truth_table_ok", 1.0), Check::range("lag_ratio", 0.9, 1.1)])
        }
        "fig6f" => {
            Scenario::new(ScenarioKind::Logic { gate: GateKind::Nor, temperature: 5.8, freq_hz: 10e3, voltage: 90.0 })
                .with_checks(vec![Check::at_least("truth_table_ok", 1.0), Check::range("lag_ratio", 0.9, 1.1)])
        }
        "suppfig2" => Scenario::new(ScenarioKind::TempSweep { temperatures: descending(100.0, 10.0, 5.0) })
            .with_checks(vec![Check::range("onset_k", 77.4 + 1e-9, 90.2 - 1e-9)]),
        _ => return None,
    };
    Some(s.named(id))
}

/// Soft-landing search at 5.8 K from the dual-pulse template.
pub fn optimize_default() -> Scenario {
    Scenario::new(ScenarioKind::Optimize {
        temperature: 5.8,
        template: EngineeredSpec::dual_pulse_defaults(),
        free: super::d_free(),
        weights: ObjectiveWeights::default(),
        options: OptimizerOptions::default(),
    })
    .with_checks(vec![Check::at_least("improvement", 0.0)])
}
