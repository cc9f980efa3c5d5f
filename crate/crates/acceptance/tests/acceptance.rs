//! Acceptance gate. One line per criterion; exits nonzero if any line fails.

use std::fs;
use std::time::Instant;

use cryoswitch::calibrate::{bounce_config, bounce_pulse};
use cryoswitch::dynamics::{self, SimConfig, State};
use cryoswitch::harness::sweep::descending;
use cryoswitch::harness::{presets, rerun_manifest, run_scenario, temperature_sweep};
use cryoswitch::network::{self, LogicCircuit};
use cryoswitch::optimize::{optimize_waveform, FreeParam, ObjectiveWeights, OptimizerOptions, Param};
use cryoswitch::rf;
use cryoswitch::waveform::{actuation_power, engineered_waveform, square_pulse, EngineeredSpec, Waveform};
use cryoswitch::{model, Environment, SwitchParams};

const EPS0: f64 = 8.8541878128e-12;

/// Closed-form pull-in from the raw parameters, written out independently.
fn v_pi_oracle(p: &SwitchParams, t: f64) -> f64 {
    let g = p.gap_actuation_295 - p.thermal_gap_shift_max * (295.0 - t) / 295.0;
    (8.0 * p.stiffness * g.powi(3) / (27.0 * EPS0 * p.electrode_area * p.lever_ratio.powi(2))).sqrt()
}

struct Gate {
    failed: Vec<String>,
}

impl Gate {
    fn line(&mut self, id: &str, pass: bool, detail: String) {
        println!("[{}] {id:<4} {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(id.to_string());
        }
    }
}

fn square_10khz() -> Waveform {
    square_pulse(90.0, 50e-6, 100e-6, 1).unwrap()
}

fn main() {
    let start = Instant::now();
    let p = SwitchParams::default();
    let mut g = Gate { failed: Vec::new() };

    // 1. Numerical pull-in against the closed form, < 1 % at every temperature, < 5 s.
    {
        let t0 = Instant::now();
        let mut worst: f64 = 0.0;
        for t in [295.0, 150.0, 77.0, 5.8, 0.0] {
            let sw = dynamics::quasi_static_sweep(&p, &Environment::at(t), 100.0, 0.05).unwrap();
            let numeric = sw.pull_in_voltage.unwrap_or(f64::NAN);
            let err = (numeric - v_pi_oracle(&p, t)).abs() / v_pi_oracle(&p, t);
            worst = if err.is_nan() { f64::NAN } else { worst.max(err) };
        }
        let secs = t0.elapsed().as_secs_f64();
        g.line("1", worst < 0.01 && secs < 5.0, format!("max rel err {worst:.2e} (tol 1e-2), {secs:.2} s (tol 5 s)"));
    }

    // 2. Cryogenic pull-in shift.
    {
        let r58 = model::pull_in_voltage(&p, 5.8).unwrap() / model::pull_in_voltage(&p, 295.0).unwrap();
        let r0 = model::pull_in_voltage(&p, 0.0).unwrap() / model::pull_in_voltage(&p, 295.0).unwrap();
        g.line(
            "2",
            (r58 - 0.969).abs() <= 0.005 && (r0 - 0.965).abs() <= 0.005,
            format!("V(5.8)/V(295) = {r58:.4} (0.969 +- 0.005), V(0)/V(295) = {r0:.4} (0.965 +- 0.005)"),
        );
    }

    // 3. On-resistance shift.
    {
        let r = model::on_resistance(&p, 5.8) / model::on_resistance(&p, 295.0);
        g.line("3", (r - 0.847).abs() < 1e-12, format!("R(5.8)/R(295) = {r:.15} (0.847, tol 1e-12)"));
    }

    // 4. Switching times.
    {
        let sq = dynamics::simulate_transient(&p, &Environment::at(295.0), &square_10khz(), &SimConfig::new(100e-6))
            .unwrap();
        let t_sq = dynamics::switching_time(&sq).seconds().unwrap_or(f64::NAN);
        let v_pi = model::pull_in_voltage(&p, 5.8).unwrap();
        let w = engineered_waveform(&EngineeredSpec::dual_pulse_defaults(), v_pi, 1).unwrap();
        let en = dynamics::simulate_transient(&p, &Environment::at(5.8), &w, &SimConfig::new(100e-6)).unwrap();
        let t_en = dynamics::switching_time(&en).seconds().unwrap_or(f64::NAN);
        g.line(
            "4",
            (t_sq / 2.7e-6 - 1.0).abs() <= 0.05 && (t_en / 3.3e-6 - 1.0).abs() <= 0.15,
            format!(
                "square 295 K {:.3} us (2.7 +- 5%), engineered 5.8 K {:.3} us (3.3 +- 15%)",
                t_sq * 1e6,
                t_en * 1e6
            ),
        );
    }

    // 5. Bounce phenomenology.
    let square_cryo;
    {
        let run = |t: f64| {
            let tr = dynamics::simulate_transient(&p, &Environment::at(t), &bounce_pulse(), &bounce_config()).unwrap();
            dynamics::bounce_metrics(&tr)
        };
        let cold = run(5.8);
        let warm = run(295.0);
        let sweep = temperature_sweep(&p, &Environment::default(), &descending(100.0, 10.0, 5.0)).unwrap();
        let onset = sweep.onset.unwrap_or(f64::NAN);
        square_cryo = cold;
        let ok = cold.bounce_count >= 5
            && (75e-6..=300e-6).contains(&cold.ring_down_duration)
            && warm.bounce_count <= 1
            && onset > 77.4
            && onset < 90.2;
        g.line(
            "5",
            ok,
            format!(
                "5.8 K: {} bounces (>= 5), ring-down {:.1} us ([75, 300]); 295 K: {} bounces (<= 1); onset {onset} K ((77.4, 90.2))",
                cold.bounce_count,
                cold.ring_down_duration * 1e6,
                warm.bounce_count
            ),
        );
    }

    // 6a. Dual-pulse program with the stated region values, hold stretched over
    // the same window as the square pulse.
    {
        let d = EngineeredSpec::dual_pulse_defaults();
        let spec = EngineeredSpec { t_hold: 400e-6 - d.t_kick - d.t_coast, period: 800e-6, ..d };
        let w = engineered_waveform(&spec, model::pull_in_voltage(&p, 5.8).unwrap(), 1).unwrap();
        let tr = dynamics::simulate_transient(&p, &Environment::at(5.8), &w, &bounce_config()).unwrap();
        let m = dynamics::bounce_metrics(&tr);
        let reduction = square_cryo.first_impact_velocity / m.first_impact_velocity;
        g.line(
            "6a",
            reduction >= 10.0 && m.bounce_count <= 1,
            format!(
                "impact {:.3} -> {:.3} m/s, reduction {reduction:.2}x (>= 10); bounces {} -> {} (<= 1)",
                square_cryo.first_impact_velocity, m.first_impact_velocity, square_cryo.bounce_count, m.bounce_count
            ),
        );
    }

    // 6b. The optimizer never returns anything worse than its template.
    {
        let env = Environment::at(5.8);
        let v_pi = model::pull_in_voltage(&p, 5.8).unwrap();
        let free = vec![
            FreeParam::new(Param::TKick, 1e-6, 3e-6),
            FreeParam::new(Param::VCoast, 0.0, v_pi - 0.5),
            FreeParam::new(Param::TCoast, 0.2e-6, 4e-6),
        ];
        let opts = OptimizerOptions { max_evals: 60, ..OptimizerOptions::default() };
        let base = EngineeredSpec::dual_pulse_defaults();
        let templates = [
            base,
            EngineeredSpec { t_kick: 1.5e-6, v_coast: 0.0, ..base },
            EngineeredSpec { t_kick: 2.8e-6, t_coast: 3e-6, ..base },
        ];
        let mut worst_gap = f64::NEG_INFINITY;
        let mut ok = true;
        for tpl in templates {
            let r = optimize_waveform(&p, &env, &tpl, &free, &ObjectiveWeights::default(), &opts).unwrap();
            ok &= r.objective <= r.template_objective;
            worst_gap = worst_gap.max(r.objective - r.template_objective);
        }
        g.line("6b", ok, format!("max J(result) - J(template) = {worst_gap:.3e} over 3 templates (<= 0)"));
    }

    // 7. RF bounds over 101 points, 4-8 GHz.
    {
        let on_rt = rf::insertion_loss_sweep(&p, 295.0, 4e9, 8e9, 101);
        let on_c = rf::insertion_loss_sweep(&p, 5.8, 4e9, 8e9, 101);
        let off_rt = rf::isolation_sweep(&p, 295.0, 4e9, 8e9, 101);
        let off_c = rf::isolation_sweep(&p, 5.8, 4e9, 8e9, 101);
        let loss = on_rt.iter().chain(&on_c).map(|q| q.insertion_loss_db()).fold(f64::MIN, f64::max);
        let iso = off_rt.iter().chain(&off_c).map(|q| q.isolation_db()).fold(f64::MAX, f64::min);
        let ordered = on_c.iter().zip(&on_rt).all(|(c, r)| c.insertion_loss_db() <= r.insertion_loss_db());
        let n = on_rt.len() == 101 && off_c.len() == 101;
        g.line(
            "7",
            loss < 0.5 && iso > 35.0 && ordered && n,
            format!("max loss {loss:.4} dB (< 0.5), min isolation {iso:.2} dB (> 35), cryo <= RT pointwise: {ordered}"),
        );
    }

    // 8. Actuation power and budget.
    {
        let pw = actuation_power(12e-15, 90.0, 10e3);
        let report = cryoswitch::harness::budget_report(&p, 32, 90.0, 10e3, 20e-6);
        g.line(
            "8",
            (pw - 0.486e-6).abs() <= 1e-12 * 0.486e-6 && report.pass,
            format!(
                "P = {:.6} uW (0.486, rel tol 1e-12); 32 switches {:.3} uW <= 20 uW",
                pw * 1e6,
                report.total_w * 1e6
            ),
        );
    }

    // 9. Logic truth tables and transient lag.
    {
        let mut tables = true;
        for t in [295.0, 5.8] {
            for (a, b) in [(false, false), (false, true), (true, false), (true, true)] {
                tables &= network::nand(a, b, &LogicCircuit::nand(), &p, t).unwrap().bit == !(a && b);
                tables &= network::nor(a, b, &LogicCircuit::nor(), &p, t).unwrap().bit == !(a || b);
            }
        }
        let mut worst: f64 = 0.0;
        let w = square_10khz();
        for t in [295.0, 5.8] {
            let env = Environment::at(t);
            let cfg = SimConfig::new(100e-6);
            let t_sw = dynamics::switching_time(&dynamics::simulate_transient(&p, &env, &w, &cfg).unwrap())
                .seconds()
                .unwrap_or(f64::NAN);
            for c in [LogicCircuit::nand(), LogicCircuit::nor()] {
                let lt = network::logic_transient(&c, [&w, &w], &p, &env, &cfg).unwrap();
                let fall = lt.crossings().into_iter().find(|(_, up)| !up).map_or(f64::NAN, |(t, _)| t);
                let err = (fall / t_sw - 1.0).abs();
                worst = if err.is_nan() { f64::NAN } else { worst.max(err) };
            }
        }
        g.line(
            "9",
            tables && worst <= 0.1,
            format!("truth tables exact: {tables}; worst |lag/t_switch - 1| = {worst:.2e} (<= 0.1)"),
        );
    }

    // 10. Numerics: energy, step halving, manifest reproducibility.
    {
        let free = SwitchParams { struct_damping: 0.0, gas_damping_ref: 0.0, ..p };
        let period = std::f64::consts::TAU * (free.mass_eff / free.stiffness).sqrt();
        let x0 = 0.5e-6;
        let cfg = SimConfig { record_stride: 1, ..SimConfig::new(100.0 * period) };
        let tr = dynamics::simulate_transient_from(
            &free,
            &Environment::default(),
            &Waveform::zero(),
            &cfg,
            State { x: x0, v: 0.0 },
        )
        .unwrap();
        let e0 = 0.5 * free.stiffness * x0 * x0;
        let drift = tr
            .tip_position
            .iter()
            .zip(&tr.tip_velocity)
            .map(|(x, v)| ((0.5 * free.mass_eff * v * v + 0.5 * free.stiffness * x * x) - e0).abs() / e0)
            .fold(0.0, f64::max);

        let w = square_10khz();
        let env = Environment::default();
        let t1 = dynamics::switching_time(&dynamics::simulate_transient(&p, &env, &w, &SimConfig::new(10e-6)).unwrap())
            .seconds()
            .unwrap_or(f64::NAN);
        let half = SimConfig { dt: 0.5e-9, ..SimConfig::new(10e-6) };
        let t2 = dynamics::switching_time(&dynamics::simulate_transient(&p, &env, &w, &half).unwrap())
            .seconds()
            .unwrap_or(f64::NAN);
        let dt_change = (t2 - t1).abs() / t1;

        let dir = tempfile::tempdir().unwrap();
        let mut identical = true;
        let mut files = 0;
        for id in presets::PRESET_IDS {
            let mut s = presets::preset(id).unwrap();
            s.output_dir = dir.path().join(id);
            let first = run_scenario(&s).unwrap();
            let again =
                rerun_manifest(&first.output_dir.join("manifest.json"), &dir.path().join(format!("{id}.re"))).unwrap();
            for name in first.manifest.outputs.keys() {
                let a = fs::read(first.output_dir.join(name)).unwrap();
                let b = fs::read(again.output_dir.join(name)).unwrap();
                identical &= a == b;
                files += 1;
            }
            identical &= first.manifest.outputs == again.manifest.outputs;
        }
        g.line(
            "10",
            drift < 1e-6 && dt_change < 1e-3 && identical,
            format!(
                "energy drift {drift:.2e} over 100 periods (< 1e-6); dt halving changes t_switch by {dt_change:.2e} (< 1e-3); {files} outputs byte-identical on rerun: {identical}"
            ),
        );
    }

    let secs = start.elapsed().as_secs_f64();
    println!("acceptance runtime {secs:.1} s (target < 120 s)");
    if g.failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: failing criteria {}", g.failed.join(", "));
        std::process::exit(1);
    }
}
