//! The four convex subproblems and the helpers around them.
//!
//! Internally each receiver's received-power expressions are divided by its
//! effective noise power, so the auxiliary variables are stored shifted:
//! `u' = u − ln σ̄²`. Transmit variables are scaled by their budgets. Both
//! shifts are undone on extraction.

use serde::{Deserialize, Serialize};

use super::conic::{ConicProgram, LinExpr, SolveStatus};
use super::hermitian::HermitianVar;
use super::surrogate::{EigTangent, ExpTangent};
use crate::channel::ChannelRealization;
use crate::error::{invalid, Error, Result};
use crate::linalg::{abs2_inner, hermitize, norm2_sq, outer, top_eig, CVec};
use crate::lowcomplexity::{NormalizedBeamformers, PowerAllocation};
use crate::network::lifted::{alpha_aerial, alpha_terminal};
use crate::network::{effective_noise, penalty_f, BeamformerSet, EffectiveNoise, LiftedIterate, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubproblemKind {
    PibfInner,
    PibfInit,
    PowerAllocIs,
    PowerAllocIsInit,
    PowerAllocZf,
}

/// Received-power and transmit-power expressions per transmitter.
/// Transmitter 0 is the aerial BS; transmitter `1 + j` serves terminal `j`.
struct RxModel {
    at_terminal: Vec<Vec<LinExpr>>,
    at_aerial: Vec<LinExpr>,
    at_sat: Vec<LinExpr>,
    tx_power: Vec<LinExpr>,
    /// Upper bound of `at_terminal[j][e]` over the power budget.
    terminal_bound: Vec<Vec<f64>>,
    aerial_bound: Vec<f64>,
}

fn budgets(sc: &ScenarioConfig) -> Vec<f64> {
    let cells = sc.terminal_cells();
    std::iter::once(sc.aerial_power).chain(cells.iter().map(|&n| sc.bs_power[n])).collect()
}

/// Channel from transmitter `e` to terminal `j`, aerial user, satellite terminal.
fn tx_channels<'a>(ch: &'a ChannelRealization, cells: &[usize], e: usize) -> (Vec<&'a CVec>, &'a CVec, &'a CVec) {
    if e == 0 {
        (ch.g.iter().collect(), &ch.g_aerial, &ch.g_sat)
    } else {
        let n = cells[e - 1];
        (ch.h[n].iter().collect(), &ch.h_aerial[n], &ch.h_sat[n])
    }
}

impl RxModel {
    fn lifted(sc: &ScenarioConfig, ch: &ChannelRealization, vars: &[HermitianVar]) -> Self {
        let cells = sc.terminal_cells();
        let bud = budgets(sc);
        let kt = sc.total_terminals();
        let mut m = Self::empty(kt);
        for (e, var) in vars.iter().enumerate() {
            let (to_terms, to_a, to_s) = tx_channels(ch, &cells, e);
            for j in 0..kt {
                m.at_terminal[j].push(var.trace_expr(&outer(to_terms[j])));
                m.terminal_bound[j].push(bud[e] * norm2_sq(to_terms[j]));
            }
            m.at_aerial.push(var.trace_expr(&outer(to_a)));
            m.aerial_bound.push(bud[e] * norm2_sq(to_a));
            m.at_sat.push(var.trace_expr(&outer(to_s)));
            m.tx_power.push(var.trace());
        }
        m
    }

    /// `vars[e]` is the budget-normalized power of transmitter `e`.
    fn scalar(sc: &ScenarioConfig, ch: &ChannelRealization, nb: &NormalizedBeamformers, vars: &[usize]) -> Self {
        let cells = sc.terminal_cells();
        let bud = budgets(sc);
        let kt = sc.total_terminals();
        let mut m = Self::empty(kt);
        for (e, &var) in vars.iter().enumerate() {
            let dir = if e == 0 { &nb.v } else { &nb.w[e - 1] };
            let (to_terms, to_a, to_s) = tx_channels(ch, &cells, e);
            let lin = |h: &CVec| {
                let mut l = LinExpr::constant(0.0);
                l.add_term(var, bud[e] * abs2_inner(h, dir));
                l
            };
            for j in 0..kt {
                m.at_terminal[j].push(lin(to_terms[j]));
                m.terminal_bound[j].push(bud[e] * abs2_inner(to_terms[j], dir));
            }
            m.at_aerial.push(lin(to_a));
            m.aerial_bound.push(bud[e] * abs2_inner(to_a, dir));
            m.at_sat.push(lin(to_s));
            let mut p = LinExpr::constant(0.0);
            p.add_term(var, bud[e]);
            m.tx_power.push(p);
        }
        m
    }

    fn empty(kt: usize) -> Self {
        Self {
            at_terminal: vec![Vec::new(); kt],
            at_aerial: Vec::new(),
            at_sat: Vec::new(),
            tx_power: Vec::new(),
            terminal_bound: vec![Vec::new(); kt],
            aerial_bound: Vec::new(),
        }
    }
}

/// What to put into the program besides the physical constraints.
struct Shape<'a> {
    /// Normalized expansion points `u'` per terminal; `None` drops the
    /// auxiliaries entirely (interference-free ZF power problem).
    anchor_u: Option<&'a [f64]>,
    /// Normalized aerial expansion point, when the aerial rate is maximized.
    anchor_u_aerial: Option<f64>,
    aerial_weight: f64,
    rate_floor: bool,
    relax: bool,
    /// Cross-interference terms omitted (zero-forcing directions).
    interference_free: bool,
    penalty: Option<LinExpr>,
    /// Solver-space point used to scale each log argument to order one.
    reference: Option<Vec<f64>>,
}

struct Handles {
    u: Vec<usize>,
    u_aerial: Option<usize>,
    delta: Option<usize>,
}

fn assemble(sc: &ScenarioConfig, noise: &EffectiveNoise, rx: &RxModel, prog: &mut ConicProgram, shape: &Shape) -> Handles {
    let kt = sc.total_terminals();
    let cells = sc.terminal_cells();
    let delta = shape.relax.then(|| prog.add_var());
    let relaxed = |mut e: LinExpr| {
        if let Some(d) = delta {
            e.add_term(d, -1.0);
        }
        e
    };

    // satellite interference temperature
    let cap = sc.interference_cap_w();
    let mut e = LinExpr::constant(1.0);
    for s in &rx.at_sat {
        e.add_scaled(s, -1.0 / cap);
    }
    prog.add_nonneg(&relaxed(e));

    // per-cell and aerial power budgets
    for n in 0..sc.n_cells {
        let mut e = LinExpr::constant(1.0);
        for j in (0..kt).filter(|&j| cells[j] == n) {
            e.add_scaled(&rx.tx_power[1 + j], -1.0 / sc.bs_power[n]);
        }
        prog.add_nonneg(&relaxed(e));
    }
    let mut e = LinExpr::constant(1.0);
    e.add_scaled(&rx.tx_power[0], -1.0 / sc.aerial_power);
    prog.add_nonneg(&relaxed(e));

    // aerial rate floor: Tr(G_A V) ≥ β̄ (σ̄²_A + Σ Tr(H_A W))
    let aerial_interference = |e: &mut LinExpr, s: f64| {
        if !shape.interference_free {
            for j in 0..kt {
                e.add_scaled(&rx.at_aerial[1 + j], s / noise.aerial);
            }
        }
    };
    if shape.rate_floor {
        let beta = sc.beta_bar();
        let norm = 1.0 / (1.0 + beta);
        let mut e = LinExpr::constant(-beta * norm);
        e.add_scaled(&rx.at_aerial[0], norm / noise.aerial);
        aerial_interference(&mut e, -beta * norm);
        prog.add_nonneg(&relaxed(e));
    }

    // terminal rates
    let mut u = Vec::new();
    for j in 0..kt {
        let sig = noise.terminals[j];
        let mut alpha = LinExpr::constant(1.0);
        let mut alpha_max = 1.0;
        if !shape.interference_free {
            for (e, expr) in rx.at_terminal[j].iter().enumerate() {
                if e != 1 + j {
                    alpha.add_scaled(expr, 1.0 / sig);
                    alpha_max += rx.terminal_bound[j][e] / sig;
                }
            }
        }
        if !shape.relax {
            let mut z = alpha.clone();
            z.add_scaled(&rx.at_terminal[j][1 + j], 1.0 / sig);
            let z_max = alpha_max + rx.terminal_bound[j][1 + j] / sig;
            add_scaled_log(prog, &z, z_max, shape.reference.as_deref(), 1.0);
        }
        if let Some(anchor) = shape.anchor_u {
            let uj = prog.add_var();
            add_taylor_row(prog, uj, anchor[j], &alpha, alpha_max, shape.relax, &relaxed);
            u.push(uj);
        }
    }

    // aerial rate in the objective (TCSSA)
    let mut u_aerial = None;
    if shape.aerial_weight != 0.0 {
        let mut alpha = LinExpr::constant(1.0);
        aerial_interference(&mut alpha, 1.0);
        let alpha_max = 1.0
            + if shape.interference_free { 0.0 } else { rx.aerial_bound[1..].iter().sum::<f64>() / noise.aerial };
        if !shape.relax {
            let mut z = alpha.clone();
            z.add_scaled(&rx.at_aerial[0], 1.0 / noise.aerial);
            let z_max = alpha_max + rx.aerial_bound[0] / noise.aerial;
            add_scaled_log(prog, &z, z_max, shape.reference.as_deref(), shape.aerial_weight);
        }
        if let Some(anchor) = shape.anchor_u_aerial {
            let ua = prog.add_var();
            add_taylor_row(prog, ua, anchor, &alpha, alpha_max, shape.relax, &relaxed);
            if !shape.relax {
                // the row helper charged weight 1; rescale to the aerial weight
                prog.q[ua] = shape.aerial_weight;
            }
            u_aerial = Some(ua);
        }
    }

    if let Some(pen) = &shape.penalty {
        if !shape.relax {
            prog.add_objective(pen, 1.0);
        }
    }
    if let Some(d) = delta {
        prog.add_objective(&LinExpr::var(d), -1.0);
    }
    Handles { u, u_aerial, delta }
}

/// Adds `weight · ln z` to the maximized objective as `t ≤ ln(z/c)` plus the
/// constant `ln c`, with `c` the value of `z` at the reference point (or the
/// geometric middle of `[1, z_max]` without one).
fn add_scaled_log(prog: &mut ConicProgram, z: &LinExpr, z_max: f64, reference: Option<&[f64]>, weight: f64) {
    let c = match reference {
        Some(x) => z.eval(x).max(1.0),
        None => z_max.max(1.0).sqrt(),
    };
    let t = prog.add_var();
    prog.add_log_epigraph(t, &z.scaled(1.0 / c));
    let mut obj = LinExpr::var(t);
    obj.add_const(c.ln());
    prog.add_objective(&obj, -weight);
}

/// `α' ≤ e^{u'_t}(u' − u'_t + 1)`, divided through by `e^{u'_t}`.
fn add_taylor_row(
    prog: &mut ConicProgram,
    u: usize,
    anchor: f64,
    alpha: &LinExpr,
    alpha_max: f64,
    relax: bool,
    relaxed: &dyn Fn(LinExpr) -> LinExpr,
) {
    let k = (-anchor).exp();
    let mut row = LinExpr::constant(1.0 - anchor);
    row.add_term(u, 1.0);
    row.add_scaled(alpha, -k);
    prog.add_nonneg(&relaxed(row));
    if relax {
        // u only appears in this row here; cap it so the optimal set stays
        // bounded without ever making the row the binding one.
        let mut ub = LinExpr::constant(anchor + k * alpha_max + 1.0);
        ub.add_term(u, -1.0);
        prog.add_nonneg(&ub);
    } else {
        prog.add_objective(&LinExpr::var(u), 1.0);
    }
}

enum Layout {
    Lifted { v: HermitianVar, w: Vec<HermitianVar> },
    Power { vars: Vec<usize> },
}

/// A fully assembled convex subproblem ready for the conic backend.
pub struct ConvexSubproblem {
    pub kind: SubproblemKind,
    pub program: ConicProgram,
    pub xi: f64,
    pub aerial_weight: f64,
    layout: Layout,
    handles: Handles,
    ln_noise: Vec<f64>,
    ln_noise_aerial: f64,
    budgets: Vec<f64>,
}

/// Result of one subproblem solve, in physical units.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// Optimal value in the maximization sense (`δ` for initialization
    /// problems).
    pub objective: f64,
    pub lifted: Option<LiftedIterate>,
    pub power: Option<PowerAllocation>,
    pub delta: Option<f64>,
    /// Auxiliaries `u` in absolute units (nats of W).
    pub u: Vec<f64>,
    pub u_aerial: Option<f64>,
    pub iterations: u32,
}

fn check_positive_alpha(sc: &ScenarioConfig, ch: &ChannelRealization, it: &LiftedIterate) -> Result<()> {
    let noise = effective_noise(ch, sc.noise_power());
    let cells = sc.terminal_cells();
    for j in 0..sc.total_terminals() {
        if !(alpha_terminal(&cells, ch, &noise, it, j) > 0.0) {
            return Err(invalid("α must be positive at the expansion point"));
        }
    }
    Ok(())
}

fn lifted_vars(sc: &ScenarioConfig, prog: &mut ConicProgram) -> (HermitianVar, Vec<HermitianVar>) {
    let cells = sc.terminal_cells();
    let v = HermitianVar::new(prog, sc.m_a, sc.aerial_power);
    let w = cells.iter().map(|&n| HermitianVar::new(prog, sc.m_g, sc.bs_power[n])).collect();
    (v, w)
}

fn base(sc: &ScenarioConfig, ch: &ChannelRealization) -> (EffectiveNoise, Vec<f64>, f64) {
    let noise = effective_noise(ch, sc.noise_power());
    let ln_noise = noise.terminals.iter().map(|x| x.ln()).collect();
    let lna = noise.aerial.ln();
    (noise, ln_noise, lna)
}

/// Inner PIBF subproblem at `anchor` with penalty factor `xi`. The aerial
/// rate enters the objective with the scenario mode's weight.
pub fn build_inner_subproblem(
    sc: &ScenarioConfig,
    ch: &ChannelRealization,
    anchor: &LiftedIterate,
    xi: f64,
) -> Result<ConvexSubproblem> {
    build_inner_subproblem_weighted(sc, ch, anchor, xi, sc.mode.aerial_weight())
}

pub fn build_inner_subproblem_weighted(
    sc: &ScenarioConfig,
    ch: &ChannelRealization,
    anchor: &LiftedIterate,
    xi: f64,
    aerial_weight: f64,
) -> Result<ConvexSubproblem> {
    anchor.validate_scaled(&budgets(sc))?;
    check_positive_alpha(sc, ch, anchor)?;
    if anchor.u.len() != sc.total_terminals() {
        return Err(invalid("anchor auxiliaries do not match the terminal count"));
    }
    if !(xi >= 0.0 && xi.is_finite()) {
        return Err(invalid("penalty factor must be finite and nonnegative"));
    }
    let (noise, ln_noise, ln_noise_aerial) = base(sc, ch);
    let mut prog = ConicProgram::new();
    let (v, w) = lifted_vars(sc, &mut prog);
    let mut vars = vec![v];
    vars.extend(w.iter().copied());
    let rx = RxModel::lifted(sc, ch, &vars);

    let mut penalty = LinExpr::constant(0.0);
    for (var, mat) in vars.iter().zip(anchor.matrices()) {
        let tangent = EigTangent::at(mat)?;
        penalty.add_scaled(&var.trace_expr(&tangent.penalty_matrix()), xi);
    }
    let mut reference = vec![0.0; prog.n_vars];
    for (var, mat) in vars.iter().zip(anchor.matrices()) {
        var.store(mat, &mut reference);
    }
    let anchor_u: Vec<f64> = anchor.u.iter().zip(&ln_noise).map(|(u, l)| u - l).collect();
    let anchor_u_aerial = if aerial_weight != 0.0 {
        let ua = anchor
            .u_aerial
            .ok_or_else(|| invalid("aerial auxiliary required when the aerial rate is in the objective"))?;
        Some(ua - ln_noise_aerial)
    } else {
        None
    };
    let shape = Shape {
        anchor_u: Some(&anchor_u),
        anchor_u_aerial,
        aerial_weight,
        rate_floor: sc.mode == crate::network::Mode::Hcssa,
        relax: false,
        interference_free: false,
        penalty: Some(penalty),
        reference: Some(reference),
    };
    let handles = assemble(sc, &noise, &rx, &mut prog, &shape);
    Ok(ConvexSubproblem {
        kind: SubproblemKind::PibfInner,
        program: prog,
        xi,
        aerial_weight,
        layout: Layout::Lifted { v, w },
        handles,
        ln_noise,
        ln_noise_aerial,
        budgets: budgets(sc),
    })
}

/// δ-maximization over the relaxed constraint set of the inner problem.
/// `u0` (and `u0_aerial` when the aerial rate is in the objective) are the
/// expansion points in absolute units.
pub fn build_init_subproblem(
    sc: &ScenarioConfig,
    ch: &ChannelRealization,
    u0: &[f64],
    u0_aerial: Option<f64>,
    aerial_weight: f64,
) -> Result<ConvexSubproblem> {
    if u0.len() != sc.total_terminals() || u0.iter().any(|u| !u.is_finite()) {
        return Err(invalid("initial auxiliaries must be finite, one per terminal"));
    }
    let (noise, ln_noise, ln_noise_aerial) = base(sc, ch);
    let mut prog = ConicProgram::new();
    let (v, w) = lifted_vars(sc, &mut prog);
    let mut vars = vec![v];
    vars.extend(w.iter().copied());
    let rx = RxModel::lifted(sc, ch, &vars);
    let anchor_u: Vec<f64> = u0.iter().zip(&ln_noise).map(|(u, l)| u - l).collect();
    let shape = Shape {
        anchor_u: Some(&anchor_u),
        anchor_u_aerial: if aerial_weight != 0.0 { u0_aerial.map(|u| u - ln_noise_aerial) } else { None },
        aerial_weight,
        rate_floor: sc.mode == crate::network::Mode::Hcssa,
        relax: true,
        interference_free: false,
        penalty: None,
        reference: None,
    };
    let handles = assemble(sc, &noise, &rx, &mut prog, &shape);
    Ok(ConvexSubproblem {
        kind: SubproblemKind::PibfInit,
        program: prog,
        xi: 0.0,
        aerial_weight,
        layout: Layout::Lifted { v, w },
        handles,
        ln_noise,
        ln_noise_aerial,
        budgets: budgets(sc),
    })
}

fn power_vars(sc: &ScenarioConfig, prog: &mut ConicProgram) -> Vec<usize> {
    let vars: Vec<usize> = prog.add_vars(1 + sc.total_terminals()).collect();
    for &x in &vars {
        prog.add_nonneg(&LinExpr::var(x));
    }
    vars
}

/// Power-allocation subproblem for fixed directions, with SCA expansion
/// points `u_anchor` (absolute units). With `relax` it becomes the
/// δ-feasibility problem used to find those points.
pub fn build_power_subproblem(
    sc: &ScenarioConfig,
    ch: &ChannelRealization,
    nb: &NormalizedBeamformers,
    u_anchor: &[f64],
    u_anchor_aerial: Option<f64>,
    aerial_weight: f64,
    relax: bool,
) -> Result<ConvexSubproblem> {
    nb.check(sc)?;
    if u_anchor.len() != sc.total_terminals() || u_anchor.iter().any(|u| !u.is_finite()) {
        return Err(invalid("expansion points must be finite, one per terminal"));
    }
    let (noise, ln_noise, ln_noise_aerial) = base(sc, ch);
    let mut prog = ConicProgram::new();
    let vars = power_vars(sc, &mut prog);
    let rx = RxModel::scalar(sc, ch, nb, &vars);
    let anchor_u: Vec<f64> = u_anchor.iter().zip(&ln_noise).map(|(u, l)| u - l).collect();
    let anchor_u_aerial = if aerial_weight != 0.0 {
        Some(u_anchor_aerial.ok_or_else(|| invalid("aerial expansion point required"))? - ln_noise_aerial)
    } else {
        None
    };
    let shape = Shape {
        anchor_u: Some(&anchor_u),
        anchor_u_aerial,
        aerial_weight,
        rate_floor: sc.mode == crate::network::Mode::Hcssa,
        relax,
        interference_free: false,
        penalty: None,
        reference: None,
    };
    let handles = assemble(sc, &noise, &rx, &mut prog, &shape);
    Ok(ConvexSubproblem {
        kind: if relax { SubproblemKind::PowerAllocIsInit } else { SubproblemKind::PowerAllocIs },
        program: prog,
        xi: 0.0,
        aerial_weight,
        layout: Layout::Power { vars },
        handles,
        ln_noise,
        ln_noise_aerial,
        budgets: budgets(sc),
    })
}

/// One-shot power problem for zero-forcing directions: all cross terms
/// are treated as zero, so no auxiliaries are needed.
pub fn build_zf_power_subproblem(
    sc: &ScenarioConfig,
    ch: &ChannelRealization,
    nb: &NormalizedBeamformers,
    aerial_weight: f64,
) -> Result<ConvexSubproblem> {
    nb.check(sc)?;
    let (noise, ln_noise, ln_noise_aerial) = base(sc, ch);
    let mut prog = ConicProgram::new();
    let vars = power_vars(sc, &mut prog);
    let rx = RxModel::scalar(sc, ch, nb, &vars);
    let shape = Shape {
        anchor_u: None,
        anchor_u_aerial: None,
        aerial_weight,
        rate_floor: sc.mode == crate::network::Mode::Hcssa,
        relax: false,
        interference_free: true,
        penalty: None,
        reference: None,
    };
    let handles = assemble(sc, &noise, &rx, &mut prog, &shape);
    Ok(ConvexSubproblem {
        kind: SubproblemKind::PowerAllocZf,
        program: prog,
        xi: 0.0,
        aerial_weight,
        layout: Layout::Power { vars },
        handles,
        ln_noise,
        ln_noise_aerial,
        budgets: budgets(sc),
    })
}

impl ConvexSubproblem {
    /// Number of conic rows and variables, for logging.
    pub fn size(&self) -> (usize, usize) {
        (self.program.n_rows(), self.program.n_vars)
    }

    pub fn to_cbf(&self) -> String {
        self.program.to_cbf()
    }
}

/// Solves a subproblem and maps the solution back to physical units.
pub fn solve(sub: &ConvexSubproblem) -> Result<SolveOutcome> {
    let sol = sub.program.solve()?;
    let x = &sol.x;
    let mut out = SolveOutcome {
        status: sol.status,
        objective: -sol.objective,
        lifted: None,
        power: None,
        delta: sub.handles.delta.map(|d| x[d]),
        u: sub.handles.u.iter().zip(&sub.ln_noise).map(|(&i, l)| x[i] + l).collect(),
        u_aerial: sub.handles.u_aerial.map(|i| x[i] + sub.ln_noise_aerial),
        iterations: sol.iterations,
    };
    if sol.status != SolveStatus::Optimal {
        return Ok(out);
    }
    match &sub.layout {
        Layout::Lifted { v, w } => {
            // Raw solver matrices: clipping their O(ε·budget) negative
            // eigenvalues would perturb α by more than the solver tolerance.
            let v_m = hermitize(&v.extract(x));
            let w_m: Vec<_> = w.iter().map(|wv| hermitize(&wv.extract(x))).collect();
            out.lifted = Some(LiftedIterate { v: v_m, w: w_m, u: out.u.clone(), u_aerial: out.u_aerial });
        }
        Layout::Power { vars } => {
            let vals: Vec<f64> = vars.iter().zip(&sub.budgets).map(|(&i, b)| (x[i] * b).max(0.0)).collect();
            out.power = Some(PowerAllocation { q: vals[0], p: vals[1..].to_vec() });
        }
    }
    Ok(out)
}

/// Auxiliary refresh `u = ln α` at the new point. The aerial
/// auxiliary is refreshed when the iterate carries one.
pub fn update_aux(sc: &ScenarioConfig, ch: &ChannelRealization, it: &LiftedIterate) -> Result<(Vec<f64>, Option<f64>)> {
    let noise = effective_noise(ch, sc.noise_power());
    let cells = sc.terminal_cells();
    let mut u = Vec::with_capacity(sc.total_terminals());
    for j in 0..sc.total_terminals() {
        let a = alpha_terminal(&cells, ch, &noise, it, j);
        if !(a > 0.0) {
            return Err(invalid("α must be positive to refresh u"));
        }
        u.push(a.ln());
    }
    let ua = match it.u_aerial {
        Some(_) => {
            let a = alpha_aerial(&cells, ch, &noise, it);
            if !(a > 0.0) {
                return Err(invalid("aerial α must be positive to refresh u"));
            }
            Some(a.ln())
        }
        None => None,
    };
    Ok((u, ua))
}

/// Surrogate objective `Σ(s − u) + w_A(s_A − u_A) − ξ F̄(X; anchor)` at a
/// point, using its own auxiliaries.
pub fn surrogate_objective(
    sc: &ScenarioConfig,
    ch: &ChannelRealization,
    point: &LiftedIterate,
    anchor: &LiftedIterate,
    xi: f64,
    aerial_weight: f64,
) -> Result<f64> {
    use crate::network::lifted::{s_aerial, s_terminal};
    let noise = effective_noise(ch, sc.noise_power());
    let cells = sc.terminal_cells();
    let mut phi = 0.0;
    for j in 0..sc.total_terminals() {
        phi += s_terminal(&cells, ch, &noise, point, j) - point.u[j];
    }
    if aerial_weight != 0.0 {
        let ua = point.u_aerial.ok_or_else(|| invalid("aerial auxiliary missing"))?;
        phi += aerial_weight * (s_aerial(&cells, ch, &noise, point) - ua);
    }
    let mut fbar = 0.0;
    for (x, a) in point.matrices().zip(anchor.matrices()) {
        fbar += EigTangent::at(a)?.penalty(x);
    }
    Ok(phi - xi * fbar)
}

/// Largest violation of the linearized constraints `α ≤ e^{u_t}(u − u_t + 1)`
/// relative to `α`, for diagnostics and tests.
pub fn taylor_gap(
    sc: &ScenarioConfig,
    ch: &ChannelRealization,
    point: &LiftedIterate,
    anchor_u: &[f64],
) -> f64 {
    let noise = effective_noise(ch, sc.noise_power());
    let cells = sc.terminal_cells();
    (0..sc.total_terminals())
        .map(|j| {
            let a = alpha_terminal(&cells, ch, &noise, point, j);
            (ExpTangent::new(anchor_u[j]).value(point.u[j]) - a).abs() / a
        })
        .fold(0.0, f64::max)
}

/// Principal-eigenvector recovery `x = √η θ` of every lifted matrix.
pub fn recover_rank_one(it: &LiftedIterate, eps2: f64) -> Result<BeamformerSet> {
    let f = penalty_f(it)?;
    if f >= eps2 {
        return Err(Error::Precondition(format!("rank-one penalty {f:e} is not below {eps2:e}")));
    }
    let rec = |m: &crate::linalg::CMat| -> Result<CVec> {
        let (eta, theta) = top_eig(m)?;
        Ok(theta * crate::linalg::c(eta.max(0.0).sqrt(), 0.0))
    };
    Ok(BeamformerSet { v: rec(&it.v)?, w: it.w.iter().map(rec).collect::<Result<_>>()? })
}
