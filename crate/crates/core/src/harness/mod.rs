//! Seeded Monte Carlo sweeps: configuration, parallel trial execution,
//! aggregation and result files.

pub mod check;
mod output;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use output::{emit_results, emit_trial, preflight, RunMetadata, AGGREGATE_FILE, METADATA_FILE, TRIALS_FILE};

use crate::channel::{draw_realization, SeedState};
use crate::error::{Error, Result};
use crate::network::{Mode, ScenarioConfig};
use crate::scheme::{scheme_by_name, RunStatus, SchemeResult, SchemeSettings, SCHEME_NAMES};

/// Scenario parameter varied along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweptParameter {
    /// Every BS budget `p̄_n` and the aerial budget `q̄` together (W).
    Power,
    /// Interference temperature Ī_S (mW).
    InterferenceTemperature,
    /// Aerial rate floor R̄_A (bps/Hz).
    AerialRateFloor,
}

impl SweptParameter {
    pub fn as_str(self) -> &'static str {
        match self {
            SweptParameter::Power => "power",
            SweptParameter::InterferenceTemperature => "interference_temperature",
            SweptParameter::AerialRateFloor => "aerial_rate_floor",
        }
    }

    /// Copy of `base` with this parameter set to `value`.
    pub fn apply(self, base: &ScenarioConfig, value: f64) -> ScenarioConfig {
        let mut sc = base.clone();
        match self {
            SweptParameter::Power => {
                sc.bs_power.iter_mut().for_each(|p| *p = value);
                sc.aerial_power = value;
            }
            SweptParameter::InterferenceTemperature => sc.interference_temp_mw = value,
            SweptParameter::AerialRateFloor => sc.aerial_rate_floor = value,
        }
        sc
    }
}

impl std::str::FromStr for SweptParameter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power" => Ok(SweptParameter::Power),
            "interference_temperature" | "I_S" => Ok(SweptParameter::InterferenceTemperature),
            "aerial_rate_floor" | "R_A" => Ok(SweptParameter::AerialRateFloor),
            other => Err(Error::Config(format!(
                "unknown swept parameter `{other}` (expected power, interference_temperature or aerial_rate_floor)"
            ))),
        }
    }
}

/// One sweep: every value × trial × mode × scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweptParameter,
    pub values: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<String>,
    #[serde(default = "default_modes")]
    pub modes: Vec<Mode>,
}

fn default_trials() -> usize {
    50
}

fn default_schemes() -> Vec<String> {
    SCHEME_NAMES.iter().map(|s| s.to_string()).collect()
}

fn default_modes() -> Vec<Mode> {
    vec![Mode::Hcssa]
}

impl SweepSpec {
    pub fn new(parameter: SweptParameter, values: Vec<f64>) -> Self {
        Self {
            parameter,
            values,
            trials: default_trials(),
            master_seed: 0,
            schemes: default_schemes(),
            modes: default_modes(),
        }
    }

    /// Parses `name=v1,v2,...`.
    pub fn parse_inline(s: &str) -> Result<Self> {
        let (name, vals) = s
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("sweep `{s}` must look like name=v1,v2,...")))?;
        let values = vals
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| Error::Config(format!("sweep value `{v}`: {e}"))))
            .collect::<Result<_>>()?;
        Ok(Self::new(name.trim().parse()?, values))
    }

    /// Checks the spec against a base scenario, including every swept scenario.
    pub fn validate(&self, base: &ScenarioConfig) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep needs at least one value".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trial count must be at least 1".into()));
        }
        if self.schemes.is_empty() || self.modes.is_empty() {
            return Err(Error::Config("sweep needs at least one scheme and one mode".into()));
        }
        for s in &self.schemes {
            scheme_by_name(s)?;
        }
        for &v in &self.values {
            let mut sc = self.parameter.apply(base, v);
            for &m in &self.modes {
                sc.mode = m;
                sc.validate()?;
            }
        }
        Ok(())
    }
}

/// Experiment file: scenario overrides plus scheme settings, both optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub settings: SchemeSettings,
    pub sweep: Option<SweepSpec>,
}

impl ExperimentConfig {
    /// Parses TOML whose `[scenario]` table overrides individual fields of
    /// the default scenario.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg_err = |e: &dyn std::fmt::Display| Error::Config(e.to_string());
        let user: toml::Table = toml::from_str(text).map_err(|e| cfg_err(&e))?;
        let mut merged = toml::Table::try_from(Self::default()).map_err(|e| cfg_err(&e))?;
        merge(&mut merged, user);
        let cfg: Self = merged.try_into().map_err(|e| cfg_err(&e))?;
        cfg.scenario.validate()?;
        cfg.settings.pibf.validate()?;
        cfg.settings.is.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }
}

/// Recursive table merge; arrays and scalars in `over` replace those in `base`.
fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Outcome of one scheme on one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub value: f64,
    pub trial: u64,
    pub scheme: String,
    pub mode: Mode,
    pub status: RunStatus,
    pub feasible: bool,
    pub sum_rate: f64,
    pub aerial_rate: f64,
    pub iterations: usize,
    pub wall_time_s: Option<f64>,
    pub message: String,
}

/// Means over the feasible trials of one (value, scheme, mode) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub value: f64,
    pub scheme: String,
    pub mode: Mode,
    pub mean_sum_rate: f64,
    pub mean_aerial_rate: f64,
    pub feasible_fraction: f64,
    pub feasible_trials: usize,
    pub trials: usize,
    pub mean_iterations: f64,
    pub mean_wall_time_s: Option<f64>,
}

/// Everything a sweep produces, in canonical (value, trial, mode, scheme) order.
#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub records: Vec<TrialRecord>,
    pub rows: Vec<AggregateRow>,
    /// Full scheme results, kept only when traces were requested.
    pub results: Vec<SchemeResult>,
}

impl SweepOutput {
    pub fn any_numerical_failure(&self) -> bool {
        self.records.iter().any(|r| r.status == RunStatus::NumericalFailure)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Record wall times (breaks byte-for-byte reproducibility).
    pub timing: bool,
    /// Keep full results so convergence traces can be written.
    pub keep_results: bool,
}

/// Runs every scheme and mode of `spec` on every (value, trial). The
/// realization of trial `t` is drawn from `(master_seed, t)` regardless of
/// the swept value, so sweeps compare paired channels.
pub fn run_sweep(spec: &SweepSpec, base: &ScenarioConfig, settings: &SchemeSettings, opts: RunOptions) -> Result<SweepOutput> {
    spec.validate(base)?;
    let schemes = spec.schemes.iter().map(|s| scheme_by_name(s)).collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(f64, u64)> = spec.values.iter().flat_map(|&v| (0..spec.trials as u64).map(move |t| (v, t))).collect();
    let per_job: Vec<Vec<(TrialRecord, SchemeResult)>> = jobs
        .par_iter()
        .map(|&(value, trial)| -> Result<Vec<(TrialRecord, SchemeResult)>> {
            let swept = spec.parameter.apply(base, value);
            let ch = draw_realization(SeedState::new(spec.master_seed, trial), &swept)?;
            let mut out = Vec::with_capacity(spec.modes.len() * schemes.len());
            for &mode in &spec.modes {
                let mut sc = swept.clone();
                sc.mode = mode;
                for s in &schemes {
                    let r = s.run(&sc, &ch, settings);
                    let rec = TrialRecord {
                        value,
                        trial,
                        scheme: s.name().to_string(),
                        mode,
                        status: r.status,
                        feasible: r.feasible,
                        sum_rate: r.sum_rate,
                        aerial_rate: r.aerial_rate,
                        iterations: r.iterations,
                        wall_time_s: opts.timing.then_some(r.wall_time_s),
                        message: r.message.clone().unwrap_or_default(),
                    };
                    out.push((rec, r));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut records = Vec::new();
    let mut results = Vec::new();
    for (rec, res) in per_job.into_iter().flatten() {
        records.push(rec);
        if opts.keep_results {
            results.push(res);
        }
    }
    let rows = aggregate(spec, &records);
    Ok(SweepOutput { records, rows, results })
}

/// Per-cell means over feasible trials, in (value, mode, scheme) order.
pub fn aggregate(spec: &SweepSpec, records: &[TrialRecord]) -> Vec<AggregateRow> {
    let mut rows = Vec::new();
    for &value in &spec.values {
        for &mode in &spec.modes {
            for scheme in &spec.schemes {
                let name = scheme_by_name(scheme).map(|s| s.name()).unwrap_or(scheme);
                let cell: Vec<&TrialRecord> = records
                    .iter()
                    .filter(|r| r.value == value && r.mode == mode && r.scheme == name)
                    .collect();
                rows.push(aggregate_cell(value, name, mode, &cell));
            }
        }
    }
    rows
}

fn aggregate_cell(value: f64, scheme: &str, mode: Mode, cell: &[&TrialRecord]) -> AggregateRow {
    let ok: Vec<&&TrialRecord> = cell.iter().filter(|r| r.feasible).collect();
    let mean = |f: &dyn Fn(&TrialRecord) -> f64| {
        if ok.is_empty() {
            f64::NAN
        } else {
            ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64
        }
    };
    let wall = if ok.iter().all(|r| r.wall_time_s.is_some()) && !ok.is_empty() {
        Some(mean(&|r| r.wall_time_s.unwrap_or(0.0)))
    } else {
        None
    };
    AggregateRow {
        value,
        scheme: scheme.to_string(),
        mode,
        mean_sum_rate: mean(&|r| r.sum_rate),
        mean_aerial_rate: mean(&|r| r.aerial_rate),
        feasible_fraction: if cell.is_empty() { 0.0 } else { ok.len() as f64 / cell.len() as f64 },
        feasible_trials: ok.len(),
        trials: cell.len(),
        mean_iterations: mean(&|r| r.iterations as f64),
        mean_wall_time_s: wall,
    }
}

/// All requested schemes on the realization of `(master_seed, trial)`.
pub fn run_trial(sc: &ScenarioConfig, seed: SeedState, schemes: &[String], settings: &SchemeSettings) -> Result<Vec<SchemeResult>> {
    sc.validate()?;
    let schemes = schemes.iter().map(|s| scheme_by_name(s)).collect::<Result<Vec<_>>>()?;
    let ch = draw_realization(seed, sc)?;
    Ok(schemes.iter().map(|s| s.run(sc, &ch, settings)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inline_sweep_parses() {
        let s = SweepSpec::parse_inline("R_A=3, 6,9").unwrap();
        assert_eq!(s.parameter, SweptParameter::AerialRateFloor);
        assert_eq!(s.values, vec![3.0, 6.0, 9.0]);
        assert_eq!(s.trials, 50);
        assert!(SweepSpec::parse_inline("bogus=1").is_err());
        assert!(SweepSpec::parse_inline("power").is_err());
        assert!(SweepSpec::parse_inline("power=a").is_err());
    }

    #[test]
    fn apply_sets_only_the_swept_field() {
        let base = ScenarioConfig::default();
        let p = SweptParameter::Power.apply(&base, 20.0);
        assert_eq!(p.bs_power, vec![20.0, 20.0]);
        assert_eq!(p.aerial_power, 20.0);
        assert_eq!(p.interference_temp_mw, base.interference_temp_mw);
        let i = SweptParameter::InterferenceTemperature.apply(&base, 1e-12);
        assert_eq!(i.interference_temp_mw, 1e-12);
        assert_eq!(i.bs_power, base.bs_power);
    }

    #[test]
    fn validation_rejects_bad_specs() {
        let base = ScenarioConfig::default();
        let mut s = SweepSpec::new(SweptParameter::Power, vec![]);
        assert!(s.validate(&base).is_err());
        s.values = vec![10.0];
        s.trials = 0;
        assert!(s.validate(&base).is_err());
        s.trials = 1;
        s.schemes = vec!["nope".into()];
        assert!(s.validate(&base).is_err());
        s.schemes = vec!["zf".into()];
        s.values = vec![-1.0];
        assert!(s.validate(&base).is_err());
    }

    #[test]
    fn experiment_config_overrides_defaults() {
        let cfg = ExperimentConfig::from_toml_str(
            "[scenario]\nR_A = 6.0\np_n = [40.0, 40.0]\n[settings.pibf]\neps1 = 1e-3\n[sweep]\nparameter = \"power\"\nvalues = [20.0]\ntrials = 3\n",
        )
        .unwrap();
        assert_eq!(cfg.scenario.aerial_rate_floor, 6.0);
        assert_eq!(cfg.scenario.bs_power, vec![40.0, 40.0]);
        assert_eq!(cfg.scenario.m_g, 8);
        assert_eq!(cfg.settings.pibf.eps1, 1e-3);
        assert_eq!(cfg.settings.pibf.t_max, 20);
        assert_eq!(cfg.sweep.unwrap().trials, 3);
        assert!(ExperimentConfig::from_toml_str("[scenario]\nbogus = 1\n").is_err());
        assert!(ExperimentConfig::from_toml_str("[scenario]\nN = 3\n").is_err());
    }

    fn record(value: f64, trial: u64, feasible: bool, sum: f64) -> TrialRecord {
        TrialRecord {
            value,
            trial,
            scheme: "zf".into(),
            mode: Mode::Hcssa,
            status: if feasible { RunStatus::Converged } else { RunStatus::Infeasible },
            feasible,
            sum_rate: sum,
            aerial_rate: 3.0,
            iterations: 1,
            wall_time_s: None,
            message: String::new(),
        }
    }

    #[test]
    fn aggregation_excludes_infeasible_trials() {
        let mut spec = SweepSpec::new(SweptParameter::Power, vec![1.0, 2.0]);
        spec.schemes = vec!["zf".into()];
        let recs = vec![record(1.0, 0, true, 10.0), record(1.0, 1, false, 0.0), record(1.0, 2, true, 20.0), record(2.0, 0, false, 0.0)];
        let rows = aggregate(&spec, &recs);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].mean_sum_rate, 15.0);
        assert_eq!(rows[0].feasible_trials, 2);
        assert_eq!(rows[0].trials, 3);
        assert!((rows[0].feasible_fraction - 2.0 / 3.0).abs() < 1e-15);
        assert!(rows[1].mean_sum_rate.is_nan());
        assert_eq!(rows[1].feasible_fraction, 0.0);
        assert_eq!(rows[0].mean_wall_time_s, None);
    }
}
