//! Two-step low-complexity schemes: direction design, then power allocation.

pub mod is;
mod types;
pub mod zf;

use log::debug;
use serde::{Deserialize, Serialize};

pub use is::{is_direction, is_step1, IsDirection};
pub use types::{recombine, NormalizedBeamformers, PowerAllocation};
pub use zf::{null_space_direction, zf_step1};

use crate::channel::ChannelRealization;
use crate::convex::{build_power_subproblem, build_zf_power_subproblem, solve, update_aux, SolveStatus};
use crate::error::{invalid, Error, Result};
use crate::linalg::{c, CVec};
use crate::network::{LiftedIterate, ScenarioConfig};
use crate::scheme::{RunStatus, SchemeResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IsSettings {
    /// Interference threshold χ (linear, W).
    pub chi: f64,
    pub eps3: f64,
    /// Power-allocation tolerance on the surrogate objective (nats).
    pub eps4: f64,
    /// Iteration cap of the direction design.
    pub is_cap: usize,
    /// Iteration cap of the power-allocation loop.
    pub power_cap: usize,
    /// Iteration cap of the feasibility pass that seeds the power loop.
    pub init_cap: usize,
}

impl Default for IsSettings {
    fn default() -> Self {
        Self { chi: 1e-16, eps3: 1e-18, eps4: 1e-2, is_cap: 200, power_cap: 50, init_cap: 20 }
    }
}

impl IsSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.chi > 0.0 && self.chi.is_finite()) {
            return Err(Error::Config("chi must be positive".into()));
        }
        if !(self.eps3 > 0.0 && self.eps4 > 0.0) {
            return Err(Error::Config("eps3 and eps4 must be positive".into()));
        }
        if self.is_cap == 0 || self.power_cap == 0 || self.init_cap == 0 {
            return Err(Error::Config("iteration caps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Is,
    Zf,
    Mrc,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Is => "is",
            Scheme::Zf => "zf",
            Scheme::Mrc => "mrc",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LowComplexityTrace {
    /// ψ iterates of every direction design (IS only), aerial BS first.
    pub psi: Vec<Vec<f64>>,
    /// δ of every feasibility-pass iteration.
    pub init_delta: Vec<f64>,
    /// Surrogate objective φ̄ (nats) after every power-allocation solve.
    pub phi: Vec<f64>,
}

/// `v̄ = g_A/‖g_A‖`, `w̄ = h/‖h‖` on every direct channel.
pub fn mrc_step1(sc: &ScenarioConfig, ch: &ChannelRealization) -> Result<NormalizedBeamformers> {
    let unit = |x: &CVec| -> Result<CVec> {
        let n = x.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(invalid("matched filter needs a nonzero channel"));
        }
        Ok(x / c(n, 0.0))
    };
    let cells = sc.terminal_cells();
    Ok(NormalizedBeamformers {
        v: unit(&ch.g_aerial)?,
        w: cells.iter().enumerate().map(|(j, &n)| unit(&ch.h[n][j])).collect::<Result<_>>()?,
    })
}

/// Interference-plus-noise auxiliaries `u = ln α` at a power allocation.
fn aux_at(sc: &ScenarioConfig, ch: &ChannelRealization, nb: &NormalizedBeamformers, pa: &PowerAllocation, aerial: bool) -> Result<(Vec<f64>, Option<f64>)> {
    let mut it = LiftedIterate::from_beamformers(&recombine(nb, pa));
    it.u_aerial = aerial.then_some(0.0);
    update_aux(sc, ch, &it)
}

/// Power allocation by successive convex approximation. A feasibility pass
/// (δ-maximization from the equal half-budget split) supplies the first
/// expansion points; the loop then runs until `|Δφ̄| ≤ ε₄`.
pub fn power_alloc_sca(
    sc: &ScenarioConfig,
    ch: &ChannelRealization,
    nb: &NormalizedBeamformers,
    settings: &IsSettings,
    trace: &mut LowComplexityTrace,
) -> Result<PowerAllocation> {
    settings.validate()?;
    let weight = sc.mode.aerial_weight();
    let aerial = weight != 0.0;
    let cells = sc.terminal_cells();
    let per_cell: Vec<usize> = (0..sc.n_cells).map(|n| cells.iter().filter(|&&m| m == n).count()).collect();
    let start = PowerAllocation {
        q: 0.5 * sc.aerial_power,
        p: cells.iter().map(|&n| 0.5 * sc.bs_power[n] / per_cell[n] as f64).collect(),
    };
    let (mut u, mut ua) = aux_at(sc, ch, nb, &start, aerial)?;
    let mut feasible = false;
    for _ in 0..settings.init_cap {
        let out = solve(&build_power_subproblem(sc, ch, nb, &u, ua, weight, true)?)?;
        if out.status != SolveStatus::Optimal {
            return Err(Error::Numerical(format!("power feasibility pass: {:?}", out.status)));
        }
        let delta = out.delta.unwrap_or(f64::NEG_INFINITY);
        let stalled = trace.init_delta.last().is_some_and(|&d| delta <= d + 1e-9 * d.abs().max(1.0));
        trace.init_delta.push(delta);
        let pa = out.power.ok_or_else(|| Error::Numerical("missing power solution".into()))?;
        (u, ua) = aux_at(sc, ch, nb, &pa, aerial)?;
        if delta >= 0.0 {
            feasible = true;
            break;
        }
        if stalled {
            break;
        }
    }
    if !feasible {
        let d = trace.init_delta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        return Err(Error::Infeasible(format!("no feasible power allocation (best δ = {d:e})")));
    }
    let mut prev = f64::NEG_INFINITY;
    for t in 0..settings.power_cap {
        let out = solve(&build_power_subproblem(sc, ch, nb, &u, ua, weight, false)?)?;
        if out.status != SolveStatus::Optimal {
            return Err(Error::Numerical(format!("power subproblem: {:?}", out.status)));
        }
        let phi = out.objective;
        trace.phi.push(phi);
        let pa = out.power.ok_or_else(|| Error::Numerical("missing power solution".into()))?;
        (u, ua) = aux_at(sc, ch, nb, &pa, aerial)?;
        debug!("power iteration {t}: phi = {phi:.6}");
        if (phi - prev).abs() <= settings.eps4 {
            return Ok(pa);
        }
        prev = phi;
    }
    Err(Error::Numerical(format!("power allocation did not converge in {} iterations", settings.power_cap)))
}

/// One-shot power allocation for zero-forcing directions.
pub fn zf_power(
    sc: &ScenarioConfig,
    ch: &ChannelRealization,
    nb: &NormalizedBeamformers,
    trace: &mut LowComplexityTrace,
) -> Result<PowerAllocation> {
    let out = solve(&build_zf_power_subproblem(sc, ch, nb, sc.mode.aerial_weight())?)?;
    match out.status {
        SolveStatus::Optimal => {
            trace.phi.push(out.objective);
            out.power.ok_or_else(|| Error::Numerical("missing power solution".into()))
        }
        SolveStatus::Infeasible => Err(Error::Infeasible("zero-forcing power problem is infeasible".into())),
        s => Err(Error::Numerical(format!("zero-forcing power problem: {s:?}"))),
    }
}

fn run_inner(scheme: Scheme, sc: &ScenarioConfig, ch: &ChannelRealization, settings: &IsSettings, trace: &mut LowComplexityTrace) -> Result<(NormalizedBeamformers, PowerAllocation)> {
    let nb = match scheme {
        Scheme::Is => {
            let (nb, dirs) = is_step1(sc, ch, settings)?;
            trace.psi = dirs.into_iter().map(|d| d.psi).collect();
            nb
        }
        Scheme::Zf => zf_step1(sc, ch)?,
        Scheme::Mrc => mrc_step1(sc, ch)?,
    };
    let pa = match scheme {
        Scheme::Zf => zf_power(sc, ch, &nb, trace)?,
        _ => power_alloc_sca(sc, ch, &nb, settings, trace)?,
    };
    Ok((nb, pa))
}

/// Step 1, step 2, recombination and evaluation of one scheme.
pub fn run_scheme(scheme: Scheme, sc: &ScenarioConfig, ch: &ChannelRealization, settings: &IsSettings) -> SchemeResult {
    let mut trace = LowComplexityTrace::default();
    let mut result = match run_inner(scheme, sc, ch, settings, &mut trace) {
        Ok((nb, pa)) => SchemeResult::with_solution(scheme.name(), sc, ch, recombine(&nb, &pa)),
        Err(e) => SchemeResult::from_error(scheme.name(), &e),
    };
    result.iterations = trace.phi.len();
    if result.status == RunStatus::Converged && !result.feasible {
        debug!("{} solution violates {:?}", scheme.name(), result.report.as_ref().map(|r| r.violated()));
    }
    result.lc_trace = Some(trace);
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_realization, SeedState};

    fn setup(seed: u64) -> (ScenarioConfig, ChannelRealization) {
        let sc = ScenarioConfig::default();
        let ch = draw_realization(SeedState::new(seed, 0), &sc).unwrap();
        (sc, ch)
    }

    #[test]
    fn mrc_normalizes() {
        let (sc, mut ch) = setup(1);
        ch.g_aerial = CVec::from_vec(vec![c(3.0, 0.0), c(4.0, 0.0)]);
        let mut sc2 = sc.clone();
        sc2.m_a = 2;
        let nb = mrc_step1(&sc2, &ch).unwrap();
        assert!((nb.v[0].re - 0.6).abs() < 1e-15 && (nb.v[1].re - 0.8).abs() < 1e-15);
        for (j, w) in nb.w.iter().enumerate() {
            let h = &ch.h[sc.terminal_cells()[j]][j];
            assert!((w.norm() - 1.0).abs() < 1e-12);
            assert!((h.dotc(w).norm() - h.norm()).abs() < 1e-12 * h.norm());
        }
    }

    #[test]
    fn every_scheme_runs_on_the_default_scenario() {
        let (sc, ch) = setup(5);
        for s in [Scheme::Is, Scheme::Zf, Scheme::Mrc] {
            let r = run_scheme(s, &sc, &ch, &IsSettings::default());
            assert!(matches!(r.status, RunStatus::Converged | RunStatus::Infeasible), "{}: {:?}", s.name(), r.message);
            if let (RunStatus::Converged, Some(bf)) = (r.status, &r.beamformers) {
                assert!(bf.w.len() == sc.total_terminals());
                let phi = &r.lc_trace.as_ref().unwrap().phi;
                assert!(phi.windows(2).all(|p| p[1] >= p[0] - 1e-6), "{phi:?}");
            }
        }
    }

    #[test]
    fn is_directions_respect_the_cap() {
        let (sc, ch) = setup(9);
        let s = IsSettings::default();
        let (_, dirs) = is_step1(&sc, &ch, &s).unwrap();
        for d in &dirs {
            assert!(d.interference <= s.chi * (1.0 + 1e-6), "{:e}", d.interference);
        }
    }

    #[test]
    fn zf_nulls_every_interference_channel() {
        let (sc, ch) = setup(2);
        let nb = zf_step1(&sc, &ch).unwrap();
        for j in 0..sc.total_terminals() {
            let t = zf::terminal_interference_matrix(&sc, &ch, j);
            assert!((t.adjoint() * &nb.w[j]).camax() < 1e-10);
        }
        for g in &ch.g {
            assert!(g.dotc(&nb.v).norm() < 1e-10);
        }
    }
}
