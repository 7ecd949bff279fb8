//! Configuration, files, rendering and the trial runner behind the CLI.

pub mod config;
pub mod files;
pub mod render;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_rational::Rational64;
use rayon::prelude::*;

pub use config::{ConfigError, InitialShape, RunConfig, KEYS};
pub use files::{
    msd_csv, parse_trajectory_csv, read_series, read_snapshot, trajectory_csv, write_snapshot, write_trajectory,
    MSD_HEADER, TRAJECTORY_HEADER,
};

use crate::dynamics::{run_observed, DynamicsError, Trajectory};
use crate::metrics::{self, Axis, MetricsError, Series};
use crate::system::ParticleSystem;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IoError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {reason}")]
    File { path: String, reason: String },
    #[error("line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error("{path}: line {line}: {reason}")]
    CsvFile { path: String, line: usize, reason: String },
    #[error("{path}: {reason}")]
    Snapshot { path: String, reason: String },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

impl IoError {
    pub(crate) fn file(path: &Path, e: std::io::Error) -> Self {
        IoError::File { path: path.display().to_string(), reason: e.to_string() }
    }

    pub(crate) fn in_file(self, path: &Path) -> Self {
        match self {
            IoError::Csv { line, reason } => IoError::CsvFile { path: path.display().to_string(), line, reason },
            other => other,
        }
    }
}

/// Runs every trial of `cfg` in parallel; trial `i` uses seed `cfg.seed + i`.
/// `on_record` sees (trial, t, configuration) at each recorded iteration.
pub fn simulate<F>(cfg: &RunConfig, on_record: F) -> Result<Vec<Trajectory>, IoError>
where
    F: Fn(usize, u64, &ParticleSystem) + Sync,
{
    cfg.validate()?;
    let initial = cfg.initial.build()?;
    let label = cfg.initial.to_string();
    (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            run_observed(
                initial.clone(),
                cfg.trial_params(i),
                cfg.light(),
                cfg.iterations,
                cfg.record_interval,
                &label,
                |t, s| on_record(i, t, s),
            )
            .map_err(IoError::from)
        })
        .collect()
}

pub fn trial_csv_path(dir: &Path, trial: usize) -> PathBuf {
    dir.join(format!("trial_{trial:03}.csv"))
}

pub fn snapshot_path(dir: &Path, trial: usize, t: u64) -> PathBuf {
    dir.join(format!("trial_{trial:03}_t{t}.snap"))
}

/// Runs `cfg` and writes per-trial CSVs and snapshots, the effective
/// configuration and an ensemble summary into `cfg.output_dir`.
pub fn execute(cfg: &RunConfig) -> Result<Vec<Trajectory>, IoError> {
    if cfg.snapshot_interval > 0 && cfg.snapshot_interval % cfg.record_interval.max(1) != 0 {
        return Err(ConfigError::Value {
            key: "snapshot_interval".into(),
            reason: "must be a multiple of record_interval".into(),
        }
        .into());
    }
    let dir = cfg.output_dir.clone();
    files::write(&dir.join("config.txt"), &cfg.to_text())?;
    let failures = std::sync::Mutex::new(Vec::new());
    let trajectories = simulate(cfg, |trial, t, system| {
        let due = t == 0
            || t == cfg.iterations
            || (cfg.snapshot_interval > 0 && t % cfg.snapshot_interval == 0);
        if due {
            if let Err(e) = write_snapshot(&snapshot_path(&dir, trial, t), system) {
                failures.lock().unwrap().push(e);
            }
        }
    })?;
    if let Some(e) = failures.into_inner().unwrap().into_iter().next() {
        return Err(e);
    }
    for (i, tr) in trajectories.iter().enumerate() {
        write_trajectory(&trial_csv_path(&dir, i), tr)?;
    }
    files::write(&dir.join("summary.txt"), &run_summary(cfg, &trajectories))?;
    Ok(trajectories)
}

pub fn run_summary(cfg: &RunConfig, trajectories: &[Trajectory]) -> String {
    let mut out = String::new();
    writeln!(out, "trial,seed,height_change,final_edges,lateral_change").unwrap();
    for (i, tr) in trajectories.iter().enumerate() {
        let dh = tr.height_change();
        writeln!(
            out,
            "{i},{},{}/{},{},{}",
            tr.params.seed,
            dh.numer(),
            dh.denom(),
            tr.last().edges,
            files::significant(tr.last().centroid_x - tr.first().centroid_x, 12)
        )
        .unwrap();
    }
    let series: Vec<Series> = trajectories.iter().map(Series::from).collect();
    let heights = metrics::height_stats(&series);
    writeln!(out, "height {heights}").unwrap();
    writeln!(out, "lateral {}", metrics::lateral_stats(&series)).unwrap();
    if let Ok(rate) = metrics::success_rate(&series, Axis::PlusY) {
        writeln!(out, "success +y {rate}").unwrap();
    }
    if cfg.trials >= 2 {
        match metrics::msd(&series, None) {
            Ok(m) => writeln!(out, "msd {} class={}", m.summary_line(), m.classification()).unwrap(),
            Err(e) => writeln!(out, "msd unavailable: {e}").unwrap(),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub lambda: f64,
    pub dim_prob: Rational64,
    pub mean_height_change: f64,
    pub sd_height_change: f64,
    pub gamma: Option<f64>,
}

/// Every (λ, dim_prob) pair over the trials of `base`, in memory.
pub fn sweep(base: &RunConfig, lambdas: &[f64], dim_probs: &[Rational64]) -> Result<Vec<SweepCell>, IoError> {
    let mut cells = Vec::new();
    for &lambda in lambdas {
        for &dim_prob in dim_probs {
            let cfg = RunConfig { lambda, dim_prob, ..base.clone() };
            let series: Vec<Series> = simulate(&cfg, |_, _, _| {})?.iter().map(Series::from).collect();
            let h = metrics::height_stats(&series);
            let gamma = metrics::msd(&series, None).ok().map(|m| m.gamma);
            cells.push(SweepCell { lambda, dim_prob, mean_height_change: h.mean, sd_height_change: h.std_dev, gamma });
        }
    }
    Ok(cells)
}

pub fn sweep_table(cells: &[SweepCell]) -> String {
    let mut out = String::from("lambda,dim_prob,mean_height_change,sd_height_change,gamma\n");
    for c in cells {
        writeln!(
            out,
            "{},{}/{},{},{},{}",
            c.lambda,
            c.dim_prob.numer(),
            c.dim_prob.denom(),
            files::significant(c.mean_height_change, 6),
            files::significant(c.sd_height_change, 6),
            c.gamma.map(|g| files::significant(g, 6)).unwrap_or_else(|| "nan".into())
        )
        .unwrap();
    }
    out
}
