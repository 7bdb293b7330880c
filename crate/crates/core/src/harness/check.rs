//! Invariant suite on random instances, run by the `check` verb.

use serde::Serialize;

use crate::channel::{draw_realization, SeedState};
use crate::error::Result;
use crate::lowcomplexity::{self, is_step1, zf::terminal_interference_matrix, zf_step1, IsSettings};
use crate::network::{check_constraints, Mode, ScenarioConfig, FEASIBILITY_TOL};
use crate::pibf::{run_for_mode, PibfSettings};
use crate::scheme::RunStatus;

/// Slack on monotone sequences (nats).
pub const MONOTONE_TOL: f64 = 1e-6;
/// Bound on the residual interference of zero-forcing directions.
pub const NULLING_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub instances: usize,
    pub failures: usize,
    /// First failing instance, if any.
    pub detail: Option<String>,
}

impl CheckOutcome {
    fn new(name: &'static str) -> Self {
        Self { name, instances: 0, failures: 0, detail: None }
    }

    fn record(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.instances += 1;
        if !ok {
            self.failures += 1;
            if self.detail.is_none() {
                self.detail = Some(detail());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Runs every check on the realizations `(master, 0..instances)` in both
/// modes. PIBF dominates the cost (about a second per run).
pub fn run_checks(base: &ScenarioConfig, master: u64, instances: usize) -> Result<Vec<CheckOutcome>> {
    base.validate()?;
    let pibf_settings = PibfSettings::default();
    let is_settings = IsSettings::default();
    let mut monotone = CheckOutcome::new("pibf_merit_monotone");
    let mut rank_one = CheckOutcome::new("pibf_rank_one");
    let mut feasible = CheckOutcome::new("solutions_feasible");
    let mut floor = CheckOutcome::new("aerial_rate_floor");
    let mut lc_monotone = CheckOutcome::new("power_allocation_monotone");
    let mut nulling = CheckOutcome::new("zf_nulling");
    let mut cap = CheckOutcome::new("is_interference_cap");
    for t in 0..instances as u64 {
        let ch = draw_realization(SeedState::new(master, t), base)?;
        for mode in [Mode::Hcssa, Mode::Tcssa] {
            let mut sc = base.clone();
            sc.mode = mode;
            let tag = |what: &str| format!("trial {t} {}: {what}", mode.as_str());
            let p = run_for_mode(&sc, &ch, &pibf_settings);
            if let Some(tr) = &p.pibf_trace {
                let v = tr.monotonicity_violations(MONOTONE_TOL);
                monotone.record(v == 0, || tag(&format!("{v} violations")));
            }
            if p.status == RunStatus::Converged {
                let f = p.pibf_trace.as_ref().and_then(|tr| tr.outer.last()).map_or(f64::NAN, |o| o.final_f);
                rank_one.record(f < pibf_settings.eps2, || tag(&format!("F = {f:e}")));
            }
            let mut results = vec![p];
            for s in [lowcomplexity::Scheme::Is, lowcomplexity::Scheme::Zf, lowcomplexity::Scheme::Mrc] {
                results.push(lowcomplexity::run_scheme(s, &sc, &ch, &is_settings));
            }
            for r in &results {
                if let (RunStatus::Converged, Some(bf)) = (r.status, &r.beamformers) {
                    let rep = check_constraints(&sc, &ch, bf);
                    feasible.record(rep.feasible, || tag(&format!("{} violates {:?}", r.scheme, rep.violated())));
                    if mode == Mode::Hcssa && r.feasible {
                        let ok = r.aerial_rate >= sc.aerial_rate_floor - 1e-4;
                        floor.record(ok, || tag(&format!("{} aerial rate {}", r.scheme, r.aerial_rate)));
                    }
                }
                if let Some(tr) = &r.lc_trace {
                    let ok = tr.phi.windows(2).all(|w| w[1] >= w[0] - MONOTONE_TOL);
                    lc_monotone.record(ok, || tag(&format!("{} φ̄ trace {:?}", r.scheme, tr.phi)));
                }
            }
        }
        if let Ok(nb) = zf_step1(base, &ch) {
            let mut worst: f64 = 0.0;
            for (j, w) in nb.w.iter().enumerate() {
                worst = worst.max((terminal_interference_matrix(base, &ch, j).adjoint() * w).camax());
            }
            for g in &ch.g {
                worst = worst.max(g.dotc(&nb.v).norm());
            }
            nulling.record(worst < NULLING_TOL, || format!("trial {t}: residual {worst:e}"));
        }
        let (_, dirs) = is_step1(base, &ch, &is_settings)?;
        let worst = dirs.iter().map(|d| d.interference / is_settings.chi).fold(0.0, f64::max);
        cap.record(worst <= 1.0 + FEASIBILITY_TOL, || format!("trial {t}: wᴴDw/χ = {worst}"));
    }
    Ok(vec![monotone, rank_one, feasible, floor, lc_monotone, nulling, cap])
}
