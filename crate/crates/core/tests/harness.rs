use std::fs;

use cryoswitch::harness::cycle::{cycling_test, identity_hook, CycleMode};
use cryoswitch::harness::{
    presets, rerun_manifest, run_scenario, HarnessError, Scenario, ScenarioKind, SwitchState, WaveformChoice,
};
use cryoswitch::waveform::{engineered_waveform, square_pulse, EngineeredSpec};
use cryoswitch::{model, Environment, SwitchParams};

#[test]
fn cycling_engineered_cold_is_drift_free() {
    let p = SwitchParams::default();
    let w = engineered_waveform(&EngineeredSpec::dual_pulse_defaults(), model::pull_in_voltage(&p, 5.8).unwrap(), 1)
        .unwrap();
    let r = cycling_test(&p, &Environment::at(5.8), &w, 1000, true, CycleMode::Reset, &identity_hook).unwrap();
    assert_eq!(r.cycles_run, 1000);
    assert_eq!(r.max_relative_drift, 0.0);
    assert_eq!(r.first_failure, None);
    assert_eq!(r.samples.iter().map(|s| s.cycle).collect::<Vec<_>>(), vec![1000]);
}

#[test]
fn cycling_square_warm_samples_each_decade() {
    let p = SwitchParams::default();
    let w = square_pulse(90.0, 50e-6, 100e-6, 1).unwrap();
    for mode in [CycleMode::Reset, CycleMode::Carry] {
        let r = cycling_test(&p, &Environment::default(), &w, 10_000, true, mode, &identity_hook).unwrap();
        assert_eq!(r.max_relative_drift, 0.0, "{mode:?}");
        assert_eq!(r.samples.iter().map(|s| s.cycle).collect::<Vec<_>>(), vec![1000, 10_000]);
        assert!(r.simulated_cycles <= 3, "{mode:?}: {}", r.simulated_cycles);
    }
}

#[test]
fn cycling_reports_first_failing_cycle() {
    let p = SwitchParams::default();
    let w = square_pulse(90.0, 50e-6, 100e-6, 1).unwrap();
    // Stiffen the beam from cycle 5 on so 90 V no longer pulls it in.
    let hook = |c: u64, p: &SwitchParams| if c >= 5 { SwitchParams { stiffness: 3.0 * p.stiffness, ..*p } } else { *p };
    let r = cycling_test(&p, &Environment::default(), &w, 20, true, CycleMode::Reset, &hook).unwrap();
    assert_eq!(r.first_failure, Some(5));
    assert_eq!(r.max_relative_drift, 0.0, "drift only over closed cycles");
}

#[test]
fn cycling_rejects_zero_cycles() {
    let p = SwitchParams::default();
    let w = square_pulse(90.0, 50e-6, 100e-6, 1).unwrap();
    assert!(cycling_test(&p, &Environment::default(), &w, 0, true, CycleMode::Reset, &identity_hook).is_err());
}

#[test]
fn manifest_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = Scenario::new(ScenarioKind::Transient {
        waveform: WaveformChoice::BouncePulse,
        temperature: 5.8,
        t_end: Some(80e-6),
        dt: None,
        record_stride: Some(20),
        compare_square: false,
    });
    s.output_dir = dir.path().join("a");
    let first = run_scenario(&s).unwrap();
    let again = rerun_manifest(&first.output_dir.join("manifest.json"), &dir.path().join("b")).unwrap();
    for name in ["trace.csv", "trace_summary.json"] {
        assert_eq!(
            fs::read(dir.path().join("a").join(name)).unwrap(),
            fs::read(dir.path().join("b").join(name)).unwrap()
        );
    }
    assert_eq!(first.manifest.outputs, again.manifest.outputs);
    assert_eq!(first.manifest.scenario_sha256, again.manifest.scenario_sha256);
    let header = fs::read_to_string(dir.path().join("a/trace.csv")).unwrap();
    assert!(header.starts_with("t_s,x_m,v_mps,v_gate\n"));
}

#[test]
fn scenario_file_resolves_params_relative_to_itself() {
    let dir = tempfile::tempdir().unwrap();
    let p = SwitchParams { r_on_295: 4.0, ..SwitchParams::default() };
    fs::write(dir.path().join("p.json"), p.to_json_pretty()).unwrap();
    fs::write(
        dir.path().join("s.json"),
        r#"{"kind": "rf", "state": "on", "temperatures": [295], "params_ref": "p.json", "output_dir": "o",
            "checks": [{"metric": "max_loss_db@295", "max": 0.5}]}"#,
    )
    .unwrap();
    let s = Scenario::load(&dir.path().join("s.json")).unwrap();
    let r = run_scenario(&s).unwrap();
    let expect = 20.0 * (1.0 + 4.0 / 100.0_f64).log10();
    assert!((r.metrics["max_loss_db@295"] - expect).abs() < 1e-12);
    assert!(r.passed());
    assert!(dir.path().join("o/rf_on_295K.csv").exists());
    assert_eq!(r.manifest.params, p);
}

#[test]
fn bad_params_file_reports_path() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("p.json"), r#"{"mass_eff": "heavy"}"#).unwrap();
    let s = Scenario {
        params_ref: Some(dir.path().join("p.json")),
        ..Scenario::new(ScenarioKind::Budget { n_switches: 1, voltage: 90.0, freq_hz: 1e4, budget_w: 1.0 })
    };
    match run_scenario(&s) {
        Err(HarnessError::Config { path, .. }) => assert_eq!(path, "params_ref.mass_eff"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn module_errors_carry_scenario_name() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = Scenario::new(ScenarioKind::Transient {
        waveform: WaveformChoice::Square { voltage: 90.0, t_on: 5e-6, period: 10e-6, reps: 1 },
        temperature: 450.0,
        t_end: None,
        dt: None,
        record_stride: None,
        compare_square: false,
    })
    .named("too-hot");
    s.output_dir = dir.path().to_path_buf();
    let e = run_scenario(&s).unwrap_err();
    assert!(matches!(&e, HarnessError::Module { scenario, .. } if scenario == "too-hot"));
    assert!(std::error::Error::source(&e).unwrap().to_string().contains("450"));
}

#[test]
fn scenario_examples() {
    let dir = tempfile::tempdir().unwrap();
    let run = |kind: ScenarioKind, sub: &str| {
        let mut s = Scenario::new(kind);
        s.output_dir = dir.path().join(sub);
        run_scenario(&s).unwrap()
    };
    let pull = run(ScenarioKind::PullinSweep { temperatures: vec![295.0, 5.8], v_max: None, v_step: 0.05 }, "pull");
    assert!((pull.metrics["ratio@5.8"] - 0.969).abs() <= 0.005);
    let rf =
        run(ScenarioKind::Rf { state: SwitchState::On, temperatures: vec![295.0], f_lo: 4e9, f_hi: 8e9, n: 101 }, "rf");
    assert!((rf.metrics["max_loss_db@295"] - 0.256).abs() < 1e-3);
    let budget = run(ScenarioKind::Budget { n_switches: 32, voltage: 90.0, freq_hz: 10e3, budget_w: 20e-6 }, "budget");
    assert!((budget.metrics["total_w"] - 15.552e-6).abs() < 1e-12);
    assert_eq!(budget.metrics["pass"], 1.0);
    let one = run(ScenarioKind::TempSweep { temperatures: vec![295.0] }, "one");
    assert!(one.metrics["bounce_count@295"] <= 1.0);
}

#[test]
fn every_preset_exists_and_serializes() {
    for id in ["fig2c", "fig2e", "fig2f", "fig3b", "fig3d", "fig3f", "fig4", "fig5", "fig6c", "fig6f", "suppfig2"] {
        let s = presets::preset(id).unwrap_or_else(|| panic!("{id}"));
        let text = serde_json::to_string_pretty(&s).unwrap();
        assert_eq!(Scenario::from_json(&text).unwrap(), s);
    }
}

#[test]
fn shipped_scenarios_parse_and_params_resolve() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut n = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let s = Scenario::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(s.resolve_params().unwrap(), SwitchParams::default(), "{}", path.display());
        assert!(!s.checks.is_empty());
        n += 1;
    }
    assert!(n >= 4);
}

#[test]
fn shipped_default_params_match_built_in() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../params.default.json");
    let p = SwitchParams::from_json(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(p, SwitchParams::default());
}
