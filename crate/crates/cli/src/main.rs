//! Command-line front end: `run` sweeps, single `trial`s and the `check` suite.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use hcssa_core::channel::SeedState;
use hcssa_core::harness::{
    check::run_checks, emit_results, emit_trial, preflight, run_sweep, run_trial, ExperimentConfig, RunMetadata, RunOptions,
    SweepSpec,
};
use hcssa_core::network::Mode;
use hcssa_core::scheme::{RunStatus, SCHEME_NAMES};
use hcssa_core::Error;

#[derive(Parser)]
#[command(name = "hcssa", version, about = "Beamforming sweeps for satellite/aerial/terrestrial spectrum sharing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo sweep over one scenario parameter.
    Run(RunArgs),
    /// One realization with full convergence traces.
    Trial(TrialArgs),
    /// Invariant suite on random instances.
    Check(CheckArgs),
}

#[derive(Args)]
struct Common {
    /// TOML file with optional [scenario], [settings] and [sweep] tables.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// Swept parameter and values, e.g. `power=20,40,60,80`.
    #[arg(long)]
    sweep: Option<String>,
    /// Comma-separated scheme names.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<String>>,
    /// Comma-separated modes (hcssa, tcssa).
    #[arg(long, value_delimiter = ',')]
    mode: Option<Vec<String>>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Trials per swept value (default 50).
    #[arg(long)]
    trials: Option<usize>,
    /// Record wall times (output is then not byte-reproducible).
    #[arg(long)]
    timing: bool,
    /// Write one convergence-trace CSV per scheme run.
    #[arg(long)]
    traces: bool,
}

#[derive(Args)]
struct TrialArgs {
    #[command(flatten)]
    common: Common,
    /// Trial index within the master seed.
    #[arg(long, default_value_t = 0)]
    trial: u64,
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<String>>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long, default_value = "trial")]
    out: PathBuf,
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    common: Common,
    /// Number of random instances.
    #[arg(long, default_value_t = 5)]
    trials: usize,
}

enum Failure {
    /// Bad configuration, arguments or output path.
    Config(String),
    /// At least one trial or check failed numerically; results were written.
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Numerical(_) | Error::Infeasible(_) | Error::NotApplicable(_) => Failure::Numerical(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn load(path: Option<&Path>) -> Result<ExperimentConfig, Failure> {
    Ok(match path {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    })
}

fn parse_modes(names: &[String]) -> Result<Vec<Mode>, Failure> {
    names.iter().map(|m| m.parse::<Mode>().map_err(Failure::from)).collect()
}

fn cmd_run(a: RunArgs) -> Result<(), Failure> {
    let cfg = load(a.common.config.as_deref())?;
    let mut spec = match (&a.sweep, cfg.sweep.clone()) {
        (Some(s), file) => {
            let mut spec = SweepSpec::parse_inline(s)?;
            if let Some(f) = file {
                spec.trials = f.trials;
                spec.master_seed = f.master_seed;
                spec.schemes = f.schemes;
                spec.modes = f.modes;
            }
            spec
        }
        (None, Some(f)) => f,
        (None, None) => return Err(Failure::Config("no sweep given (use --sweep or a [sweep] table)".into())),
    };
    if let Some(seed) = a.common.seed {
        spec.master_seed = seed;
    }
    if let Some(s) = a.schemes {
        spec.schemes = s;
    }
    if let Some(m) = a.mode {
        spec.modes = parse_modes(&m)?;
    }
    if let Some(t) = a.trials {
        spec.trials = t;
    }
    spec.validate(&cfg.scenario)?;
    preflight(&a.out)?;
    info!("sweeping {} over {:?}: {} trials", spec.parameter.as_str(), spec.values, spec.trials);
    let opts = RunOptions { timing: a.timing, keep_results: a.traces };
    let out = run_sweep(&spec, &cfg.scenario, &cfg.settings, opts)?;
    let meta = RunMetadata::new(&cfg.scenario, &cfg.settings, Some(&spec), None, a.timing);
    emit_results(&a.out, &out, &meta)?;
    for r in &out.rows {
        println!(
            "{:>12} {:>5} {:>5}  sum {:>8.3}  aerial {:>7.3}  feasible {}/{}",
            r.value,
            r.scheme,
            r.mode.as_str(),
            r.mean_sum_rate,
            r.mean_aerial_rate,
            r.feasible_trials,
            r.trials
        );
    }
    if out.any_numerical_failure() {
        let n = out.records.iter().filter(|r| r.status == RunStatus::NumericalFailure).count();
        return Err(Failure::Numerical(format!("{n} scheme runs failed numerically; partial results in {}", a.out.display())));
    }
    Ok(())
}

fn cmd_trial(a: TrialArgs) -> Result<(), Failure> {
    let cfg = load(a.common.config.as_deref())?;
    let mut sc = cfg.scenario.clone();
    if let Some(m) = &a.mode {
        sc.mode = m.parse()?;
    }
    let schemes = a.schemes.unwrap_or_else(|| SCHEME_NAMES.iter().map(|s| s.to_string()).collect());
    let seed = SeedState::new(a.common.seed.unwrap_or(0), a.trial);
    preflight(&a.out)?;
    let results = run_trial(&sc, seed, &schemes, &cfg.settings)?;
    let meta = RunMetadata::new(&sc, &cfg.settings, None, Some(seed), a.timing);
    emit_trial(&a.out, &results, &meta)?;
    for r in &results {
        println!(
            "{:>5} {:<17} feasible {:<5}  sum {:>8.3}  aerial {:>7.3}  iterations {}{}",
            r.scheme,
            r.status.as_str(),
            r.feasible,
            r.sum_rate,
            r.aerial_rate,
            r.iterations,
            r.message.as_deref().map(|m| format!("  ({m})")).unwrap_or_default()
        );
    }
    if results.iter().any(|r| r.status == RunStatus::NumericalFailure) {
        return Err(Failure::Numerical("a scheme failed numerically".into()));
    }
    Ok(())
}

fn cmd_check(a: CheckArgs) -> Result<(), Failure> {
    let cfg = load(a.common.config.as_deref())?;
    if a.trials == 0 {
        return Err(Failure::Config("--trials must be at least 1".into()));
    }
    let outcomes = run_checks(&cfg.scenario, a.common.seed.unwrap_or(0), a.trials)?;
    let mut failed = 0;
    for o in &outcomes {
        let verdict = if o.passed() { "PASS" } else { "FAIL" };
        println!("{verdict} {} ({} instances, {} failures){}", o.name, o.instances, o.failures, o.detail.as_deref().map(|d| format!(": {d}")).unwrap_or_default());
        failed += usize::from(!o.passed());
    }
    if failed > 0 {
        return Err(Failure::Numerical(format!("{failed} checks failed")));
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Trial(a) => cmd_trial(a),
        Command::Check(a) => cmd_check(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
