//! CSV and JSON writers for run directories.
//!
//! A run directory holds `trials.csv`, `summary.csv`, `plot.csv`,
//! `meta.json` and, with tracing on, one CSV per trial under `traces/`.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::aggregate::{Outcome, SummaryRow};
use crate::config::RunConfig;
use crate::trial::TrialRecord;

pub const TRIALS_FILE: &str = "trials.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const PLOT_FILE: &str = "plot.csv";
pub const META_FILE: &str = "meta.json";
pub const TRACE_DIR: &str = "traces";

/// One line of `trials.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub algo: String,
    pub problem: String,
    pub dim: usize,
    pub trial: usize,
    pub seed: u64,
    pub success: bool,
    pub evaluations: u64,
    pub best_f: f64,
    pub reason: String,
}

impl From<&TrialRecord> for TrialRow {
    fn from(r: &TrialRecord) -> Self {
        Self {
            algo: r.algo.to_string(),
            problem: r.problem.clone(),
            dim: r.dim,
            trial: r.trial,
            seed: r.seed,
            success: r.success,
            evaluations: r.evaluations,
            best_f: r.best_f,
            reason: r.reason.to_string(),
        }
    }
}

impl From<&TrialRow> for Outcome {
    fn from(r: &TrialRow) -> Self {
        Self {
            algo: r.algo.clone(),
            problem: r.problem.clone(),
            dim: r.dim,
            success: r.success,
            evaluations: r.evaluations,
        }
    }
}

#[derive(Serialize)]
struct PlotRow<'a> {
    algo: &'a str,
    problem: &'a str,
    dim: usize,
    metric: &'static str,
    value: f64,
}

#[derive(Serialize)]
struct TraceCsvRow {
    iteration: u64,
    evaluations: u64,
    best_f: f64,
    sigma: Option<f64>,
    coord: usize,
    abs_mean: f64,
    marginal_std: Option<f64>,
}

#[derive(Serialize)]
struct Meta<'a> {
    version: &'static str,
    generator: &'static str,
    normal_transform: &'static str,
    cells: &'a [RunConfig],
}

pub fn write_trials(path: &Path, rows: &[TrialRow]) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trials(path: &Path) -> Result<Vec<TrialRow>> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    r.deserialize()
        .map(|row| row.with_context(|| format!("parsing {}", path.display())))
        .collect()
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Long format: one `(cell, metric, value)` per line; null statistics are
/// left out.
pub fn write_plot(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        let metrics = [
            ("success_rate", Some(r.success_rate)),
            ("adjusted_median", r.adjusted_median),
            ("adjusted_q25", r.adjusted_q25),
            ("adjusted_q75", r.adjusted_q75),
        ];
        for (metric, value) in metrics {
            if let Some(value) = value {
                w.serialize(PlotRow {
                    algo: &r.algo,
                    problem: &r.problem,
                    dim: r.dim,
                    metric,
                    value,
                })?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn trace_path(dir: &Path, rec: &TrialRecord) -> PathBuf {
    dir.join(TRACE_DIR).join(format!(
        "{}_{}_{}_trial{}.csv",
        rec.algo, rec.problem, rec.dim, rec.trial
    ))
}

/// Per-coordinate long format: one line per iteration and coordinate.
pub fn write_trace(path: &Path, rec: &TrialRecord) -> Result<()> {
    let Some(rows) = &rec.trace else {
        return Ok(());
    };
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for row in rows {
        for (coord, &abs_mean) in row.abs_mean.iter().enumerate() {
            w.serialize(TraceCsvRow {
                iteration: row.iteration,
                evaluations: row.evaluations,
                best_f: row.best_f,
                sigma: row.sigma,
                coord,
                abs_mean,
                marginal_std: row.marginal_std.get(coord).copied(),
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_meta(path: &Path, cells: &[RunConfig]) -> Result<()> {
    let meta = Meta {
        version: env!("CARGO_PKG_VERSION"),
        generator: cmawm::rng::GENERATOR_ID,
        normal_transform: cmawm::rng::NORMAL_TRANSFORM_ID,
        cells,
    };
    let text = serde_json::to_string_pretty(&meta)?;
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Writes every artifact of a finished run into `dir`.
pub fn write_run(
    dir: &Path,
    cells: &[RunConfig],
    records: &[TrialRecord],
) -> Result<Vec<SummaryRow>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let rows: Vec<TrialRow> = records.iter().map(TrialRow::from).collect();
    write_trials(&dir.join(TRIALS_FILE), &rows)?;
    let outcomes: Vec<Outcome> = rows.iter().map(Outcome::from).collect();
    let summary = crate::aggregate::aggregate(&outcomes);
    write_summary(&dir.join(SUMMARY_FILE), &summary)?;
    write_plot(&dir.join(PLOT_FILE), &summary)?;
    write_meta(&dir.join(META_FILE), cells)?;
    if records.iter().any(|r| r.trace.is_some()) {
        fs::create_dir_all(dir.join(TRACE_DIR))?;
        for r in records {
            write_trace(&trace_path(dir, r), r)?;
        }
    }
    Ok(summary)
}
