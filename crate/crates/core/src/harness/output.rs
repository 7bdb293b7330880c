//! Result files: aggregate and per-trial CSVs, convergence traces and run
//! metadata.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{SweepOutput, SweepSpec, TrialRecord};
use crate::channel::SeedState;
use crate::convex::{SOLVER_EPS, SOLVER_FALLBACK_EPS};
use crate::error::{Error, Result};
use crate::network::ScenarioConfig;
use crate::scheme::{SchemeResult, SchemeSettings};

pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const TRIALS_FILE: &str = "trials.csv";
pub const METADATA_FILE: &str = "metadata.json";
const TRACE_DIR: &str = "traces";

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub software_version: String,
    pub scenario: ScenarioConfig,
    pub settings: SchemeSettings,
    pub sweep: Option<SweepSpec>,
    /// Seed of a single-trial run.
    pub seed: Option<SeedState>,
    pub solver_eps: f64,
    pub solver_fallback_eps: f64,
    pub timing: bool,
}

impl RunMetadata {
    pub fn new(scenario: &ScenarioConfig, settings: &SchemeSettings, sweep: Option<&SweepSpec>, seed: Option<SeedState>, timing: bool) -> Self {
        Self {
            software_version: env!("CARGO_PKG_VERSION").to_string(),
            scenario: scenario.clone(),
            settings: settings.clone(),
            sweep: sweep.cloned(),
            seed,
            solver_eps: SOLVER_EPS,
            solver_fallback_eps: SOLVER_FALLBACK_EPS,
            timing,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

/// Creates `dir` and proves it writable, so I/O problems surface before
/// any computation.
pub fn preflight(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let probe = dir.join(".write-probe");
    fs::File::create(&probe)?.write_all(b"ok")?;
    fs::remove_file(probe)?;
    Ok(())
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut wr = csv::Writer::from_path(path)?;
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

#[derive(Serialize)]
struct PhiRow {
    iteration: usize,
    phi: f64,
}

/// Trace files of one result; returns the paths written.
fn write_traces(dir: &Path, stem: &str, r: &SchemeResult) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    if let Some(tr) = &r.pibf_trace {
        let p = dir.join(format!("{stem}.csv"));
        tr.write_csv(fs::File::create(&p)?)?;
        written.push(p);
    }
    if let Some(tr) = &r.lc_trace {
        let p = dir.join(format!("{stem}.csv"));
        let rows: Vec<PhiRow> = tr.phi.iter().enumerate().map(|(i, &phi)| PhiRow { iteration: i + 1, phi }).collect();
        let mut wr = csv::WriterBuilder::new().has_headers(false).from_path(&p)?;
        wr.write_record(["iteration", "phi"])?;
        for row in &rows {
            wr.serialize(row)?;
        }
        wr.flush()?;
        written.push(p);
    }
    Ok(written)
}

fn trace_stem(rec: &TrialRecord, value_index: usize) -> String {
    format!("{}_{}_v{value_index}_t{}", rec.scheme, rec.mode.as_str().to_lowercase(), rec.trial)
}

/// Writes the aggregate and per-trial CSVs and the metadata, plus one trace
/// CSV per result when the sweep kept them.
pub fn emit_results(dir: &Path, out: &SweepOutput, meta: &RunMetadata) -> Result<()> {
    preflight(dir)?;
    write_rows(&dir.join(AGGREGATE_FILE), &out.rows)?;
    write_rows(&dir.join(TRIALS_FILE), &out.records)?;
    if !out.results.is_empty() {
        if out.results.len() != out.records.len() {
            return Err(Error::Precondition("results and trial records differ in length".into()));
        }
        let values = meta.sweep.as_ref().map(|s| s.values.clone()).unwrap_or_default();
        let tdir = dir.join(TRACE_DIR);
        fs::create_dir_all(&tdir)?;
        for (rec, res) in out.records.iter().zip(&out.results) {
            let vi = values.iter().position(|&v| v == rec.value).unwrap_or(0);
            write_traces(&tdir, &trace_stem(rec, vi), res)?;
        }
    }
    write_json(&dir.join(METADATA_FILE), meta)
}

#[derive(Serialize)]
struct TrialSummary<'a> {
    scheme: &'a str,
    status: &'a str,
    feasible: bool,
    sum_rate: f64,
    aerial_rate: f64,
    rates: &'a [f64],
    lifted_sum_rate: Option<f64>,
    iterations: usize,
    message: Option<&'a str>,
    wall_time_s: Option<f64>,
}

/// Single-trial output: a summary per scheme, every trace, and metadata.
pub fn emit_trial(dir: &Path, results: &[SchemeResult], meta: &RunMetadata) -> Result<()> {
    preflight(dir)?;
    let summary: Vec<TrialSummary> = results
        .iter()
        .map(|r| TrialSummary {
            scheme: &r.scheme,
            status: r.status.as_str(),
            feasible: r.feasible,
            sum_rate: r.sum_rate,
            aerial_rate: r.aerial_rate,
            rates: &r.rates,
            lifted_sum_rate: r.lifted_sum_rate,
            iterations: r.iterations,
            message: r.message.as_deref(),
            wall_time_s: meta.timing.then_some(r.wall_time_s),
        })
        .collect();
    write_json(&dir.join("trial.json"), &summary)?;
    let mode = meta.scenario.mode.as_str().to_lowercase();
    for r in results {
        write_traces(dir, &format!("{}_{mode}_trace", r.scheme), r)?;
    }
    write_json(&dir.join(METADATA_FILE), meta)
}
