//! Scheme interface and the name-keyed registry used by the harness and CLI.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::lowcomplexity::{IsSettings, LowComplexityTrace, Scheme as LcScheme};
use crate::network::{
    aerial_rate, check_constraints, effective_noise, terminal_rates, BeamformerSet, FeasibilityReport, ScenarioConfig,
};
use crate::pibf::{ConvergenceTrace, PibfSettings};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// Finished and produced a solution (check `feasible`).
    Converged,
    /// Iteration caps hit before the stopping rule; no solution reported.
    NotConverged,
    /// No feasible point exists (or none was found).
    Infeasible,
    /// The scheme's structural assumptions do not hold for this instance.
    NotApplicable,
    NumericalFailure,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::NotConverged => "not_converged",
            RunStatus::Infeasible => "infeasible",
            RunStatus::NotApplicable => "not_applicable",
            RunStatus::NumericalFailure => "numerical_failure",
        }
    }
}

/// Settings for every scheme, carried together so one config drives a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct SchemeSettings {
    pub pibf: PibfSettings,
    pub is: IsSettings,
}

#[derive(Debug, Clone)]
pub struct SchemeResult {
    pub scheme: String,
    pub status: RunStatus,
    pub message: Option<String>,
    pub beamformers: Option<BeamformerSet>,
    pub report: Option<FeasibilityReport>,
    /// `status == Converged` and the vector solution passes every constraint.
    pub feasible: bool,
    /// Per-terminal rates (bps/Hz) from the vector solution.
    pub rates: Vec<f64>,
    pub sum_rate: f64,
    pub aerial_rate: f64,
    /// Terrestrial sum rate of the final lifted iterate (PIBF only).
    pub lifted_sum_rate: Option<f64>,
    pub iterations: usize,
    pub pibf_trace: Option<ConvergenceTrace>,
    pub lc_trace: Option<LowComplexityTrace>,
    pub wall_time_s: f64,
}

impl SchemeResult {
    pub fn failed(scheme: &str, status: RunStatus, message: impl Into<String>) -> Self {
        Self {
            scheme: scheme.to_string(),
            status,
            message: Some(message.into()),
            beamformers: None,
            report: None,
            feasible: false,
            rates: Vec::new(),
            sum_rate: 0.0,
            aerial_rate: 0.0,
            lifted_sum_rate: None,
            iterations: 0,
            pibf_trace: None,
            lc_trace: None,
            wall_time_s: 0.0,
        }
    }

    /// Maps a library error onto a run status.
    pub fn from_error(scheme: &str, err: &Error) -> Self {
        let status = match err {
            Error::Infeasible(_) => RunStatus::Infeasible,
            Error::NotApplicable(_) => RunStatus::NotApplicable,
            _ => RunStatus::NumericalFailure,
        };
        Self::failed(scheme, status, err.to_string())
    }

    /// Result carrying a vector solution, with rates and feasibility filled in.
    pub fn with_solution(scheme: &str, sc: &ScenarioConfig, ch: &ChannelRealization, bf: BeamformerSet) -> Self {
        let noise = effective_noise(ch, sc.noise_power());
        let rates = terminal_rates(sc, ch, &bf, &noise);
        let report = check_constraints(sc, ch, &bf);
        let mut r = Self::failed(scheme, RunStatus::Converged, "");
        r.message = None;
        r.sum_rate = rates.iter().sum();
        r.rates = rates;
        r.aerial_rate = aerial_rate(sc, ch, &bf, &noise);
        r.feasible = report.feasible;
        r.report = Some(report);
        r.beamformers = Some(bf);
        r
    }
}

pub trait BeamformingScheme: Send + Sync {
    fn name(&self) -> &'static str;
    /// Runs on one realization. The scenario's mode selects HCSSA or TCSSA.
    fn run(&self, sc: &ScenarioConfig, ch: &ChannelRealization, settings: &SchemeSettings) -> SchemeResult;
}

struct Pibf;

impl BeamformingScheme for Pibf {
    fn name(&self) -> &'static str {
        "pibf"
    }

    fn run(&self, sc: &ScenarioConfig, ch: &ChannelRealization, settings: &SchemeSettings) -> SchemeResult {
        timed(|| crate::pibf::run_for_mode(sc, ch, &settings.pibf))
    }
}

struct LowComplexity(LcScheme);

impl BeamformingScheme for LowComplexity {
    fn name(&self) -> &'static str {
        self.0.name()
    }

    fn run(&self, sc: &ScenarioConfig, ch: &ChannelRealization, settings: &SchemeSettings) -> SchemeResult {
        timed(|| crate::lowcomplexity::run_scheme(self.0, sc, ch, &settings.is))
    }
}

fn timed(f: impl FnOnce() -> SchemeResult) -> SchemeResult {
    let start = std::time::Instant::now();
    let mut r = f();
    r.wall_time_s = start.elapsed().as_secs_f64();
    r
}

/// Registered scheme names, in canonical order.
pub const SCHEME_NAMES: [&str; 4] = ["pibf", "is", "zf", "mrc"];

pub fn registry() -> Vec<Box<dyn BeamformingScheme>> {
    SCHEME_NAMES.iter().map(|n| scheme_by_name(n).expect("registered")).collect()
}

pub fn scheme_by_name(name: &str) -> Result<Box<dyn BeamformingScheme>> {
    Ok(match name.to_ascii_lowercase().as_str() {
        "pibf" => Box::new(Pibf),
        "is" => Box::new(LowComplexity(LcScheme::Is)),
        "zf" => Box::new(LowComplexity(LcScheme::Zf)),
        "mrc" => Box::new(LowComplexity(LcScheme::Mrc)),
        other => return Err(Error::Config(format!("unknown scheme `{other}` (expected one of {SCHEME_NAMES:?})"))),
    })
}
