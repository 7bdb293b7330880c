//! Penalty-based iterative beamforming: feasible-point initialization by
//! δ-maximization, then an outer penalty-escalation loop around an inner
//! successive convex approximation loop.

use std::io::Write;

use log::{debug, warn};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelRealization, Link};
use crate::convex::{
    build_init_subproblem, build_inner_subproblem_weighted, recover_rank_one, solve, surrogate_objective, update_aux,
    SolveStatus,
};
use crate::error::{invalid, Error, Result};
use crate::network::lifted::lifted_rate_nats;
use crate::network::{effective_noise, merit_mu_weighted, penalty_f, LiftedIterate, Mode, ScenarioConfig};
use crate::scheme::{RunStatus, SchemeResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PibfSettings {
    /// Inner-loop tolerance on the surrogate objective.
    pub eps1: f64,
    /// Rank-one penalty threshold.
    pub eps2: f64,
    pub t_max: usize,
    pub xi0: f64,
    pub omega: f64,
    pub outer_cap: usize,
    /// Iteration cap of the initialization loop.
    pub init_cap: usize,
}

impl Default for PibfSettings {
    fn default() -> Self {
        Self { eps1: 3e-3, eps2: 1e-3, t_max: 20, xi0: 1e-5, omega: 10.0, outer_cap: 12, init_cap: 20 }
    }
}

impl PibfSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 1.0) {
            return Err(Error::Config("omega must exceed 1".into()));
        }
        if !(self.eps1 > 0.0 && self.eps2 > 0.0 && self.xi0 > 0.0) {
            return Err(Error::Config("tolerances and xi0 must be positive".into()));
        }
        if self.t_max == 0 || self.outer_cap == 0 || self.init_cap == 0 {
            return Err(Error::Config("iteration caps must be positive".into()));
        }
        Ok(())
    }
}

/// Column names of [`ConvergenceTrace::write_csv`].
pub const TRACE_HEADER: [&str; 6] = ["outer", "inner", "phi", "mu", "F", "xi"];

/// One inner iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub outer: usize,
    pub inner: usize,
    /// Surrogate objective at the subproblem solution.
    pub phi: f64,
    /// Merit at the new anchor.
    pub mu: f64,
    #[serde(rename = "F")]
    pub f: f64,
    pub xi: f64,
}

/// One outer iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterRecord {
    pub xi: f64,
    /// Merit at the anchor the inner loop started from.
    pub start_mu: f64,
    pub inner_iterations: usize,
    pub converged: bool,
    pub final_f: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub rows: Vec<TraceRow>,
    pub outer: Vec<OuterRecord>,
    /// δ after each initialization iteration.
    pub init_delta: Vec<f64>,
}

impl ConvergenceTrace {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        wr.write_record(TRACE_HEADER)?;
        for r in &self.rows {
            wr.serialize(r)?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Breaks of the monotone merit chain: `φ` below the starting merit or the new
    /// merit below `φ`, each beyond `tol`.
    pub fn monotonicity_violations(&self, tol: f64) -> usize {
        let mut bad = 0;
        for (k, rec) in self.outer.iter().enumerate() {
            let mut prev_mu = rec.start_mu;
            for r in self.rows.iter().filter(|r| r.outer == k) {
                if r.phi < prev_mu - tol || r.mu < r.phi - tol {
                    bad += 1;
                }
                prev_mu = r.mu;
            }
        }
        bad
    }
}

#[derive(Debug, Clone)]
pub enum InitOutcome {
    Feasible { point: LiftedIterate, iterations: usize },
    Infeasible { best_delta: f64, iterations: usize },
}

fn aerial_weight_for(sc: &ScenarioConfig) -> f64 {
    sc.mode.aerial_weight()
}

/// Initialization loop: maximize δ over the relaxed constraints, refresh the
/// auxiliaries, repeat until δ ≥ 0, δ stops improving, or the cap is hit.
pub fn initialize(sc: &ScenarioConfig, ch: &ChannelRealization, settings: &PibfSettings) -> Result<(InitOutcome, Vec<f64>)> {
    initialize_weighted(sc, ch, settings, aerial_weight_for(sc))
}

pub fn initialize_weighted(
    sc: &ScenarioConfig,
    ch: &ChannelRealization,
    settings: &PibfSettings,
    aerial_weight: f64,
) -> Result<(InitOutcome, Vec<f64>)> {
    let noise = effective_noise(ch, sc.noise_power());
    let mut rng = ch.seed.rng(Link::Aux(100));
    let mut draw = |sig2: f64| rng.random_range(0.0..10f64.ln()) + sig2.ln();
    let mut u: Vec<f64> = noise.terminals.iter().map(|&s| draw(s)).collect();
    let mut ua = (aerial_weight != 0.0).then(|| draw(noise.aerial));
    let mut deltas = Vec::new();
    for t in 0..settings.init_cap {
        let sub = build_init_subproblem(sc, ch, &u, ua, aerial_weight)?;
        let out = solve(&sub)?;
        if out.status != SolveStatus::Optimal {
            return Err(Error::Numerical(format!("initialization subproblem: {:?}", out.status)));
        }
        let delta = out.delta.unwrap_or(f64::NEG_INFINITY);
        deltas.push(delta);
        let mut point = out.lifted.ok_or_else(|| Error::Numerical("missing lifted solution".into()))?;
        point.u_aerial = ua;
        let (nu, nua) = update_aux(sc, ch, &point)?;
        point.u = nu.clone();
        point.u_aerial = nua;
        debug!("init iteration {t}: delta = {delta:e}");
        if delta >= 0.0 {
            return Ok((InitOutcome::Feasible { point, iterations: t + 1 }, deltas));
        }
        if t > 0 && delta <= deltas[t - 1] + 1e-9 * delta.abs().max(1.0) {
            break;
        }
        u = nu;
        ua = nua;
    }
    let best = deltas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((InitOutcome::Infeasible { best_delta: best, iterations: deltas.len() }, deltas))
}

/// Output of the penalty loops, before vector recovery.
#[derive(Debug, Clone)]
pub struct PibfRun {
    pub status: RunStatus,
    pub message: Option<String>,
    pub final_point: Option<LiftedIterate>,
    pub trace: ConvergenceTrace,
    pub inner_iterations: usize,
}

fn convex_step(a: &LiftedIterate, b: &LiftedIterate, step: f64) -> LiftedIterate {
    let mix = |x: &crate::linalg::CMat, y: &crate::linalg::CMat| x * crate::linalg::c(1.0 - step, 0.0) + y * crate::linalg::c(step, 0.0);
    LiftedIterate {
        v: mix(&a.v, &b.v),
        w: a.w.iter().zip(&b.w).map(|(x, y)| mix(x, y)).collect(),
        u: a.u.clone(),
        u_aerial: a.u_aerial,
    }
}

/// Penalty loops from a feasible starting point.
pub fn penalty_loops(
    sc: &ScenarioConfig,
    ch: &ChannelRealization,
    settings: &PibfSettings,
    start: LiftedIterate,
    aerial_weight: f64,
    mut trace: ConvergenceTrace,
) -> Result<PibfRun> {
    settings.validate()?;
    let mut anchor = start;
    let mut previous: Option<LiftedIterate> = None;
    let mut xi = settings.xi0;
    let mut total_inner = 0;
    for outer in 0..settings.outer_cap {
        let start_mu = merit_mu_weighted(sc, ch, &anchor, xi, aerial_weight)?;
        let mut phi_prev = f64::NEG_INFINITY;
        let mut t = 0;
        let mut converged = false;
        while t < settings.t_max {
            let mut out = solve(&build_inner_subproblem_weighted(sc, ch, &anchor, xi, aerial_weight)?)?;
            if out.status != SolveStatus::Optimal {
                let Some(prev) = previous.as_ref() else {
                    return Ok(failure(trace, total_inner, format!("inner subproblem {:?} at the initial anchor", out.status)));
                };
                warn!("inner subproblem {:?}; retrying from a shortened step", out.status);
                let mut retry = convex_step(prev, &anchor, 0.1);
                let (u, ua) = update_aux(sc, ch, &retry)?;
                retry.u = u;
                retry.u_aerial = ua;
                anchor = retry;
                out = solve(&build_inner_subproblem_weighted(sc, ch, &anchor, xi, aerial_weight)?)?;
                if out.status != SolveStatus::Optimal {
                    return Ok(failure(trace, total_inner, format!("inner subproblem {:?} after retry", out.status)));
                }
            }
            let solution = out.lifted.ok_or_else(|| Error::Numerical("missing lifted solution".into()))?;
            let phi = surrogate_objective(sc, ch, &solution, &anchor, xi, aerial_weight)?;
            let mut next = solution;
            let (u, ua) = update_aux(sc, ch, &next)?;
            next.u = u;
            next.u_aerial = ua;
            let mu = merit_mu_weighted(sc, ch, &next, xi, aerial_weight)?;
            let f = penalty_f(&next)?;
            t += 1;
            total_inner += 1;
            trace.rows.push(TraceRow { outer, inner: t, phi, mu, f, xi });
            debug!("outer {outer} inner {t}: phi={phi:.6} mu={mu:.6} F={f:e} xi={xi:e}");
            previous = Some(std::mem::replace(&mut anchor, next));
            if (phi - phi_prev).abs() <= settings.eps1 {
                converged = true;
                break;
            }
            phi_prev = phi;
        }
        let final_f = penalty_f(&anchor)?;
        trace.outer.push(OuterRecord { xi, start_mu, inner_iterations: t, converged, final_f });
        if final_f < settings.eps2 {
            return Ok(PibfRun {
                status: RunStatus::Converged,
                message: None,
                final_point: Some(anchor),
                trace,
                inner_iterations: total_inner,
            });
        }
        xi *= settings.omega;
    }
    Ok(PibfRun {
        status: RunStatus::NotConverged,
        message: Some(format!("rank-one penalty still above {:e} after {} outer iterations", settings.eps2, settings.outer_cap)),
        final_point: Some(anchor),
        trace,
        inner_iterations: total_inner,
    })
}

fn failure(trace: ConvergenceTrace, inner: usize, msg: String) -> PibfRun {
    PibfRun { status: RunStatus::NumericalFailure, message: Some(msg), final_point: None, trace, inner_iterations: inner }
}

fn run_weighted(sc: &ScenarioConfig, ch: &ChannelRealization, settings: &PibfSettings, aerial_weight: f64) -> Result<SchemeResult> {
    let (init, deltas) = initialize_weighted(sc, ch, settings, aerial_weight)?;
    let trace = ConvergenceTrace { init_delta: deltas, ..Default::default() };
    let start = match init {
        InitOutcome::Feasible { point, .. } => point,
        InitOutcome::Infeasible { best_delta, iterations } => {
            let mut r = SchemeResult::failed(
                "pibf",
                RunStatus::Infeasible,
                format!("no feasible starting point (best δ = {best_delta:e} after {iterations} iterations)"),
            );
            r.pibf_trace = Some(trace);
            return Ok(r);
        }
    };
    let run = penalty_loops(sc, ch, settings, start, aerial_weight, trace)?;
    let mut result = match (run.status, &run.final_point) {
        (RunStatus::Converged, Some(point)) => {
            let bf = recover_rank_one(point, settings.eps2)?;
            let mut r = SchemeResult::with_solution("pibf", sc, ch, bf);
            let noise = effective_noise(ch, sc.noise_power());
            r.lifted_sum_rate = Some(lifted_rate_nats(sc, ch, &noise, point, 0.0) * std::f64::consts::LOG2_E);
            r
        }
        (status, _) => SchemeResult::failed("pibf", status, run.message.clone().unwrap_or_default()),
    };
    result.iterations = run.inner_iterations;
    result.pibf_trace = Some(run.trace);
    Ok(result)
}

/// PIBF for the hierarchical architecture: terrestrial sum rate subject to
/// the aerial rate floor.
pub fn run_pibf(sc: &ScenarioConfig, ch: &ChannelRealization, settings: &PibfSettings) -> SchemeResult {
    if sc.mode != Mode::Hcssa {
        return SchemeResult::from_error("pibf", &invalid("run_pibf expects an HCSSA scenario"));
    }
    run_weighted(sc, ch, settings, 0.0).unwrap_or_else(|e| SchemeResult::from_error("pibf", &e))
}

/// PIBF for the traditional architecture: terrestrial plus aerial rate, no
/// aerial floor.
pub fn run_pibf_tcssa(sc: &ScenarioConfig, ch: &ChannelRealization, settings: &PibfSettings) -> SchemeResult {
    run_pibf_tcssa_weighted(sc, ch, settings, 1.0)
}

/// TCSSA with an arbitrary aerial weight; weight 0 reduces to HCSSA with no
/// rate floor.
pub fn run_pibf_tcssa_weighted(sc: &ScenarioConfig, ch: &ChannelRealization, settings: &PibfSettings, weight: f64) -> SchemeResult {
    let mut sc = sc.clone();
    sc.mode = Mode::Tcssa;
    run_weighted(&sc, ch, settings, weight).unwrap_or_else(|e| SchemeResult::from_error("pibf", &e))
}

pub fn run_for_mode(sc: &ScenarioConfig, ch: &ChannelRealization, settings: &PibfSettings) -> SchemeResult {
    match sc.mode {
        Mode::Hcssa => run_pibf(sc, ch, settings),
        Mode::Tcssa => run_pibf_tcssa(sc, ch, settings),
    }
}
