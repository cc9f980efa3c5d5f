//! Bounded Nelder-Mead search over engineered-waveform parameters.
//!
//! Every candidate is scored by a full transient run. The search works in
//! unit-cube coordinates, projects trial points back into the box, restarts
//! with a smaller simplex when it stalls, and orders ties lexicographically on
//! the parameter vector so results do not depend on evaluation order.

use std::cmp::Ordering;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{self, DynamicsError, SimConfig};
use crate::model;
use crate::params::{Environment, ModelError, SwitchParams};
use crate::waveform::{engineered_waveform, EngineeredSpec, Segment, Waveform};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizeError {
    #[error("at least one free parameter is required")]
    NoFreeParameters,
    #[error("invalid bounds for {param:?}: {reason}")]
    InvalidBounds { param: Param, reason: String },
    #[error("no candidate closed the switch; best infeasible candidate: {diagnostic}")]
    Infeasible { diagnostic: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    VKick,
    TKick,
    VCoast,
    TCoast,
    VHold,
    THold,
    VReleaseCoast,
    TReleaseCoast,
    VCatch,
    TCatch,
}

impl Param {
    pub fn get(self, s: &EngineeredSpec) -> f64 {
        match self {
            Param::VKick => s.v_kick,
            Param::TKick => s.t_kick,
            Param::VCoast => s.v_coast,
            Param::TCoast => s.t_coast,
            Param::VHold => s.v_hold,
            Param::THold => s.t_hold,
            Param::VReleaseCoast => s.v_release_coast,
            Param::TReleaseCoast => s.t_release_coast,
            Param::VCatch => s.v_catch,
            Param::TCatch => s.t_catch,
        }
    }

    pub fn set(self, s: &mut EngineeredSpec, v: f64) {
        let slot = match self {
            Param::VKick => &mut s.v_kick,
            Param::TKick => &mut s.t_kick,
            Param::VCoast => &mut s.v_coast,
            Param::TCoast => &mut s.t_coast,
            Param::VHold => &mut s.v_hold,
            Param::THold => &mut s.t_hold,
            Param::VReleaseCoast => &mut s.v_release_coast,
            Param::TReleaseCoast => &mut s.t_release_coast,
            Param::VCatch => &mut s.v_catch,
            Param::TCatch => &mut s.t_catch,
        };
        *slot = v;
    }
}

/// A parameter the search may move, with its box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeParam {
    pub param: Param,
    pub lo: f64,
    pub hi: f64,
}

impl FreeParam {
    pub fn new(param: Param, lo: f64, hi: f64) -> Self {
        FreeParam { param, lo, hi }
    }
}

/// `J = velocity*v^2 + bounce*N + settle*t_settle + late*max(0, t_close - t_budget)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObjectiveWeights {
    /// s^2/m^2
    pub velocity: f64,
    pub bounce: f64,
    /// 1/s
    pub settle: f64,
    /// 1/s
    pub late: f64,
    pub t_budget: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        ObjectiveWeights { velocity: 1.0, bounce: 1e-4, settle: 0.0, late: 1e6, t_budget: 6.6e-6 }
    }
}

impl ObjectiveWeights {
    pub fn zero() -> Self {
        ObjectiveWeights { velocity: 0.0, bounce: 0.0, settle: 0.0, late: 0.0, t_budget: 0.0 }
    }

    pub fn score(&self, m: &LandingMetrics) -> f64 {
        let t_close = m.t_close.unwrap_or(f64::INFINITY);
        let mut j = 0.0;
        for (w, term) in [
            (self.velocity, m.impact_velocity * m.impact_velocity),
            (self.bounce, m.bounce_count as f64),
            (self.settle, m.settle_time),
            (self.late, (t_close - self.t_budget).max(0.0)),
        ] {
            if w != 0.0 {
                j += w * term;
            }
        }
        j
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    #[default]
    Actuation,
    /// "Impact" becomes the tip speed at the final separation after release.
    Release,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerOptions {
    pub max_evals: usize,
    pub max_restarts: usize,
    /// Initial simplex edge in unit-cube coordinates.
    pub initial_step: f64,
    /// Simplex size (unit-cube, max-norm) that counts as stalled.
    pub stall_size: f64,
    /// Simulated actuation window; the hold is extended to fill it.
    pub window: f64,
    pub phase: Phase,
    pub dt: f64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            max_evals: 240,
            max_restarts: 4,
            initial_step: 0.25,
            stall_size: 1e-4,
            window: 100e-6,
            phase: Phase::Actuation,
            dt: SimConfig::default().dt,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandingMetrics {
    pub impact_velocity: f64,
    pub bounce_count: usize,
    pub settle_time: f64,
    /// Actuation: first-contact delay. Release: delay to the final separation.
    pub t_close: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryPoint {
    pub iteration: usize,
    pub evaluations: usize,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOutcome {
    pub spec: EngineeredSpec,
    pub objective: f64,
    pub template_objective: f64,
    pub metrics: LandingMetrics,
    pub evaluations: usize,
    pub history: Vec<HistoryPoint>,
}

impl OptimizeOutcome {
    /// CSV `iteration,objective` of the best objective after each iteration.
    pub fn write_history_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["iteration", "objective"])?;
        for h in &self.history {
            out.serialize((h.iteration, h.objective))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Outcome of scoring one candidate.
#[derive(Debug, Clone)]
enum Score {
    Feasible { j: f64, metrics: LandingMetrics },
    Infeasible(String),
}

impl Score {
    fn value(&self) -> f64 {
        match self {
            Score::Feasible { j, .. } => *j,
            Score::Infeasible(_) => f64::INFINITY,
        }
    }
}

struct Problem<'a> {
    p: &'a SwitchParams,
    env: &'a Environment,
    template: EngineeredSpec,
    free: &'a [FreeParam],
    weights: ObjectiveWeights,
    opts: OptimizerOptions,
    v_pi: f64,
}

impl Problem<'_> {
    fn spec_at(&self, u: &[f64]) -> EngineeredSpec {
        let mut s = self.template;
        for (fp, ui) in self.free.iter().zip(u) {
            fp.param.set(&mut s, fp.lo + ui.clamp(0.0, 1.0) * (fp.hi - fp.lo));
        }
        s
    }

    fn unit_of(&self, s: &EngineeredSpec) -> Vec<f64> {
        self.free
            .iter()
            .map(|fp| if fp.hi > fp.lo { ((fp.param.get(s) - fp.lo) / (fp.hi - fp.lo)).clamp(0.0, 1.0) } else { 0.0 })
            .collect()
    }

    fn score(&self, s: &EngineeredSpec) -> Result<Score, OptimizeError> {
        let m = match landing_metrics(self.p, self.env, s, self.v_pi, &self.opts) {
            Ok(Some(m)) => m,
            Ok(None) => return Ok(Score::Infeasible(format!("{s:?} did not close"))),
            Err(OptimizeError::Dynamics(DynamicsError::Waveform(e))) => {
                return Ok(Score::Infeasible(format!("{s:?}: {e}")))
            }
            Err(e) => return Err(e),
        };
        Ok(Score::Feasible { j: self.weights.score(&m), metrics: m })
    }
}

/// Landing metrics of `spec`; `None` when the switch never closes (or, in the
/// release phase, never separates).
pub fn landing_metrics(
    p: &SwitchParams,
    env: &Environment,
    spec: &EngineeredSpec,
    v_pi: f64,
    opts: &OptimizerOptions,
) -> Result<Option<LandingMetrics>, OptimizeError> {
    spec.validate(v_pi).map_err(DynamicsError::from)?;
    let cfg = SimConfig { dt: opts.dt, record_stride: 10, ..SimConfig::new(opts.window) };
    match opts.phase {
        Phase::Actuation => {
            let w = actuation_waveform(spec, opts.window).map_err(DynamicsError::from)?;
            let tr = dynamics::simulate_transient(p, env, &w, &cfg)?;
            let Some(t_close) = dynamics::switching_time(&tr).seconds() else { return Ok(None) };
            let b = dynamics::bounce_metrics(&tr);
            Ok(Some(LandingMetrics {
                impact_velocity: b.first_impact_velocity,
                bounce_count: b.bounce_count,
                settle_time: b.settle_time,
                t_close: Some(t_close),
            }))
        }
        Phase::Release => {
            let w = engineered_waveform(spec, v_pi, 1).map_err(DynamicsError::from)?;
            let cfg = SimConfig { t_end: spec.period, ..cfg };
            let tr = dynamics::simulate_transient(p, env, &w, &cfg)?;
            let t_rel = spec.release_start();
            let Some(last) = tr.contact_events.iter().rfind(|e| e.leave_time.is_some_and(|l| l >= t_rel)) else {
                return Ok(None);
            };
            let leave = last.leave_time.unwrap_or(t_rel);
            let recontacts = tr.contact_events.iter().filter(|e| e.touch_time > t_rel).count();
            let x_final = tr.final_state.x;
            let settle_end = tr
                .tip_position
                .iter()
                .rposition(|x| (x - x_final).abs() > tr.contact_epsilon)
                .map_or(t_rel, |j| tr.times[(j + 1).min(tr.times.len() - 1)]);
            Ok(Some(LandingMetrics {
                impact_velocity: last.leave_velocity.unwrap_or(0.0).abs(),
                bounce_count: recontacts,
                settle_time: (settle_end - t_rel).max(0.0),
                t_close: Some(leave - t_rel),
            }))
        }
    }
}

/// Kick and coast of `spec`, then its hold voltage until `window`.
pub fn actuation_waveform(spec: &EngineeredSpec, window: f64) -> Result<Waveform, crate::waveform::WaveformError> {
    let hold = window - spec.t_kick - spec.t_coast;
    let segs = vec![
        Segment::new(spec.v_kick, spec.t_kick),
        Segment::new(spec.v_coast, spec.t_coast),
        Segment::new(spec.v_hold, hold.max(0.0)),
    ];
    let w = Waveform { segments: segs, period: 2.0 * window, repetitions: 1 }.normalized();
    w.validate()?;
    Ok(w)
}

#[derive(Clone)]
struct Vertex {
    u: Vec<f64>,
    f: f64,
}

fn cmp_vertex(a: &Vertex, b: &Vertex) -> Ordering {
    a.f.total_cmp(&b.f).then_with(|| {
        for (x, y) in a.u.iter().zip(&b.u) {
            match x.total_cmp(y) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    })
}

/// Minimise the landing objective over the `free` parameters of `template`.
pub fn optimize_waveform(
    p: &SwitchParams,
    env: &Environment,
    template: &EngineeredSpec,
    free: &[FreeParam],
    weights: &ObjectiveWeights,
    opts: &OptimizerOptions,
) -> Result<OptimizeOutcome, OptimizeError> {
    if free.is_empty() {
        return Err(OptimizeError::NoFreeParameters);
    }
    for fp in free {
        if !(fp.lo.is_finite() && fp.hi.is_finite() && fp.lo <= fp.hi) {
            return Err(OptimizeError::InvalidBounds { param: fp.param, reason: "need finite lo <= hi".into() });
        }
    }
    let v_pi = model::pull_in_voltage(p, env.temperature)?;
    let prob = Problem { p, env, template: *template, free, weights: *weights, opts: *opts, v_pi };
    let n = free.len();

    let template_score = prob.score(template)?;
    let mut best_spec = *template;
    let mut best = template_score.clone();
    let mut evals = 1usize;
    let mut history = Vec::new();

    let consider = |best: &mut Score, best_spec: &mut EngineeredSpec, s: &Score, spec: EngineeredSpec| {
        let better = match (&*best, s) {
            (Score::Infeasible(_), Score::Feasible { .. }) => true,
            (Score::Feasible { j: a, .. }, Score::Feasible { j: b, .. }) => b < a,
            _ => false,
        };
        if better {
            *best = s.clone();
            *best_spec = spec;
        }
    };

    let eval_many = |points: &[Vec<f64>]| -> Result<Vec<(EngineeredSpec, Score)>, OptimizeError> {
        points
            .par_iter()
            .map(|u| {
                let s = prob.spec_at(u);
                prob.score(&s).map(|sc| (s, sc))
            })
            .collect()
    };

    let mut start = prob.unit_of(template);
    let mut step = opts.initial_step;
    let mut iteration = 0usize;
    let mut infeasible_note = match &template_score {
        Score::Infeasible(d) => Some(d.clone()),
        _ => None,
    };

    'restarts: for _restart in 0..=opts.max_restarts {
        let mut pts = vec![start.clone()];
        for i in 0..n {
            let mut u = start.clone();
            u[i] = if u[i] + step <= 1.0 { u[i] + step } else { u[i] - step };
            pts.push(u);
        }
        let scored = eval_many(&pts)?;
        evals += scored.len();
        let mut simplex: Vec<Vertex> = Vec::with_capacity(n + 1);
        for (u, (s, sc)) in pts.into_iter().zip(scored) {
            if let Score::Infeasible(d) = &sc {
                infeasible_note.get_or_insert_with(|| d.clone());
            }
            consider(&mut best, &mut best_spec, &sc, s);
            simplex.push(Vertex { f: sc.value(), u });
        }

        while evals < opts.max_evals {
            iteration += 1;
            simplex.sort_by(cmp_vertex);
            history.push(HistoryPoint { iteration, evaluations: evals, objective: best.value() });
            let size = simplex[1..]
                .iter()
                .flat_map(|v| v.u.iter().zip(&simplex[0].u).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if size < opts.stall_size || simplex.iter().all(|v| v.f == simplex[0].f) && size < step * 1e-2 {
                start = simplex[0].u.clone();
                step *= 0.5;
                continue 'restarts;
            }

            let centroid: Vec<f64> =
                (0..n).map(|i| simplex[..n].iter().map(|v| v.u[i]).sum::<f64>() / n as f64).collect();
            let worst = simplex[n].clone();
            let along = |c: f64| -> Vec<f64> {
                centroid.iter().zip(&worst.u).map(|(m, w)| (m + c * (m - w)).clamp(0.0, 1.0)).collect()
            };
            let mut eval_one = |u: Vec<f64>| -> Result<Vertex, OptimizeError> {
                let s = prob.spec_at(&u);
                let sc = prob.score(&s)?;
                evals += 1;
                consider(&mut best, &mut best_spec, &sc, s);
                Ok(Vertex { f: sc.value(), u })
            };

            let refl = eval_one(along(1.0))?;
            if cmp_vertex(&refl, &simplex[0]) == Ordering::Less {
                let exp = eval_one(along(2.0))?;
                simplex[n] = if cmp_vertex(&exp, &refl) == Ordering::Less { exp } else { refl };
                continue;
            }
            if cmp_vertex(&refl, &simplex[n - 1]) == Ordering::Less {
                simplex[n] = refl;
                continue;
            }
            let con = if cmp_vertex(&refl, &worst) == Ordering::Less {
                eval_one(along(0.5))?
            } else {
                eval_one(along(-0.5))?
            };
            if cmp_vertex(&con, &worst.clone().min_with(&refl)) == Ordering::Less {
                simplex[n] = con;
                continue;
            }
            let b = simplex[0].u.clone();
            let shrunk: Vec<Vec<f64>> =
                simplex[1..].iter().map(|v| v.u.iter().zip(&b).map(|(x, y)| y + 0.5 * (x - y)).collect()).collect();
            let scored = eval_many(&shrunk)?;
            evals += scored.len();
            for (k, (u, (s, sc))) in shrunk.into_iter().zip(scored).enumerate() {
                consider(&mut best, &mut best_spec, &sc, s);
                simplex[k + 1] = Vertex { f: sc.value(), u };
            }
        }
        break;
    }

    match best {
        Score::Feasible { j, metrics } => {
            history.push(HistoryPoint { iteration: iteration + 1, evaluations: evals, objective: j });
            Ok(OptimizeOutcome {
                spec: best_spec,
                objective: j,
                template_objective: template_score.value(),
                metrics,
                evaluations: evals,
                history,
            })
        }
        Score::Infeasible(d) => Err(OptimizeError::Infeasible { diagnostic: infeasible_note.unwrap_or(d) }),
    }
}

trait MinWith {
    fn min_with(self, other: &Self) -> Self;
}

impl MinWith for Vertex {
    fn min_with(self, other: &Vertex) -> Vertex {
        if cmp_vertex(other, &self) == Ordering::Less {
            other.clone()
        } else {
            self
        }
    }
}
