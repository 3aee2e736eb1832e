//! Seeded runs, trace files and the per-seed summary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use drift_core::{run_learner, EnvironmentRegistry, LearnerContext, LearnerRegistry, RunTrace};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};

pub const SUMMARY_HEADER: &str = "config_digest,seed,mistakes,queries,final_rate,mean_error";
pub const OUTPUT_DIR_VAR: &str = "DRIFT_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "drift-output";

/// Totals of one seeded run.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub config_digest: String,
    pub seed: u64,
    pub mistakes: usize,
    pub queries: usize,
    /// Mistake rate over the last `⌈T/10⌉` rounds.
    pub final_rate: f64,
    pub mean_error: f64,
}

/// Length of the window `final_rate` is measured on.
pub fn final_window(horizon: usize) -> usize {
    horizon.div_ceil(10)
}

impl SummaryRow {
    pub fn from_trace(config_digest: &str, seed: u64, trace: &RunTrace) -> Self {
        let n = trace.len();
        Self {
            config_digest: config_digest.to_string(),
            seed,
            mistakes: trace.total_mistakes(),
            queries: trace.total_queries(),
            final_rate: trace.mistake_rate(n - final_window(n).min(n)..n),
            mean_error: trace.mean_exact_error(),
        }
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.config_digest, self.seed, self.mistakes, self.queries, self.final_rate, self.mean_error
        )
    }
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut s = String::from(SUMMARY_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{}", r.csv_line());
    }
    s
}

pub fn parse_summary(text: &str) -> Result<Vec<SummaryRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(SUMMARY_HEADER) {
        return Err(HarnessError::Usage("summary CSV has an unexpected header".into()));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = || HarnessError::Usage(format!("malformed summary row {}", i + 1));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(bad());
            }
            Ok(SummaryRow {
                config_digest: f[0].to_string(),
                seed: f[1].parse().map_err(|_| bad())?,
                mistakes: f[2].parse().map_err(|_| bad())?,
                queries: f[3].parse().map_err(|_| bad())?,
                final_rate: f[4].parse().map_err(|_| bad())?,
                mean_error: f[5].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

/// One seeded run of the configured learner on the configured environment.
pub fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<RunTrace> {
    let mut env = EnvironmentRegistry::default().build(&cfg.environment_spec(seed))?;
    let schedule = cfg.schedule();
    let ctx = LearnerContext {
        dimension: env.dimension(),
        schedule: &schedule,
    };
    let mut learner = LearnerRegistry::default().build(&cfg.learner_spec(), &ctx)?;
    Ok(run_learner(env.as_mut(), learner.as_mut(), cfg.horizon)?)
}

/// Runs every seed; each run owns its state, so order does not matter.
pub fn run_seeds(cfg: &ExperimentConfig, parallel: bool) -> Result<Vec<(u64, RunTrace)>> {
    let one = |&seed: &u64| run_seed(cfg, seed).map(|t| (seed, t));
    if parallel {
        cfg.seeds.par_iter().map(one).collect()
    } else {
        cfg.seeds.iter().map(one).collect()
    }
}

/// Explicit override, then the config, then `DRIFT_OUTPUT_DIR`, then the default.
pub fn resolve_output_dir(cfg: &ExperimentConfig, explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .or_else(|| std::env::var_os(OUTPUT_DIR_VAR).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

/// Creates `dir` and proves a file can be written there.
pub fn ensure_writable(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let probe = dir.join(format!(".drift-probe-{}", std::process::id()));
    fs::write(&probe, b"").map_err(|e| HarnessError::io(&probe, e))?;
    fs::remove_file(&probe).map_err(|e| HarnessError::io(&probe, e))
}

pub fn trace_path(dir: &Path, digest: &str, seed: u64) -> PathBuf {
    dir.join(format!("trace_{digest}_seed{seed}.csv"))
}

pub fn summary_path(dir: &Path, digest: &str) -> PathBuf {
    dir.join(format!("summary_{digest}.csv"))
}

#[derive(Debug)]
pub struct ExperimentOutput {
    pub digest: String,
    pub traces: Vec<(u64, RunTrace)>,
    pub rows: Vec<SummaryRow>,
    pub summary_path: PathBuf,
}

/// Runs all seeds and writes one trace CSV per seed plus the summary CSV.
pub fn run_experiment(cfg: &ExperimentConfig, dir: &Path, parallel: bool) -> Result<ExperimentOutput> {
    ensure_writable(dir)?;
    let digest = cfg.digest();
    let work = |&seed: &u64| -> Result<(u64, RunTrace)> {
        let trace = run_seed(cfg, seed)?;
        let path = trace_path(dir, &digest, seed);
        fs::write(&path, trace.to_csv()).map_err(|e| HarnessError::io(&path, e))?;
        Ok((seed, trace))
    };
    let traces: Vec<(u64, RunTrace)> = if parallel {
        cfg.seeds.par_iter().map(work).collect::<Result<_>>()?
    } else {
        cfg.seeds.iter().map(work).collect::<Result<_>>()?
    };
    let rows: Vec<SummaryRow> = traces
        .iter()
        .map(|(seed, t)| SummaryRow::from_trace(&digest, *seed, t))
        .collect();
    let summary = summary_path(dir, &digest);
    fs::write(&summary, summary_csv(&rows)).map_err(|e| HarnessError::io(&summary, e))?;
    Ok(ExperimentOutput {
        digest,
        traces,
        rows,
        summary_path: summary,
    })
}
