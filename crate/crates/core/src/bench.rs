//! Timing runs over generated histories, fitted against the cost model.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::cost_model::{eval_model, fit_alpha, CostError, CostModelParams, CostObservation};
use crate::engine::{analyze, EngineError, EngineOptions, TtmRecord};
use crate::hunk_index::{BackendKind, BackendOptions};
use crate::repo_source::RangeOptions;
use crate::synth::{generate, SynthError, SynthSpec};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("benchmark grid is empty")]
    EmptyGrid,
    #[error("no backends selected")]
    NoBackends,
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Named grids for the command line.
pub fn named_grid(name: &str) -> Option<Vec<SynthSpec>> {
    let point = |seed, n_commits, n_devs, files| SynthSpec {
        seed,
        n_commits,
        n_devs,
        files,
        edits_per_commit: (1, 4),
        ..SynthSpec::default()
    };
    match name {
        "small" => Some(vec![
            point(1, 10, 2, 2),
            point(2, 20, 3, 3),
            point(3, 40, 4, 4),
            point(4, 80, 6, 6),
        ]),
        "medium" => Some(vec![
            point(11, 50, 3, 4),
            point(12, 100, 5, 8),
            point(13, 200, 8, 12),
            point(14, 400, 10, 16),
            point(15, 800, 12, 24),
        ]),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    #[serde(rename = "H")]
    pub hunks: usize,
    #[serde(rename = "D")]
    pub developers: usize,
    #[serde(rename = "T")]
    pub commits: usize,
    pub backend: BackendKind,
    pub measured_seconds: f64,
    pub predicted_seconds: Option<f64>,
    pub residual: Option<f64>,
}

#[derive(Debug)]
pub struct BackendFit {
    pub backend: BackendKind,
    pub fit: Result<CostModelParams, CostError>,
}

#[derive(Debug)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub fits: Vec<BackendFit>,
    /// Grid points whose records differed between backends.
    pub mismatched_points: Vec<usize>,
}

impl BenchReport {
    pub fn observations(&self, backend: BackendKind) -> Vec<CostObservation> {
        self.rows
            .iter()
            .filter(|r| r.backend == backend)
            .map(|r| CostObservation {
                hunks: r.hunks as f64,
                developers: r.developers as f64,
                commits: r.commits as f64,
                measured_seconds: r.measured_seconds,
            })
            .collect()
    }

    pub fn write_csv(&self, w: impl Write) -> Result<(), BenchError> {
        let mut out = csv::Writer::from_writer(w);
        for row in &self.rows {
            out.serialize(row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Generate each grid point under `work_dir`, time every backend on it, and
/// fit the model per backend. Runs are serial so timings do not interfere.
pub fn benchmark_suite(
    grid: &[SynthSpec],
    backends: &[BackendKind],
    work_dir: &Path,
) -> Result<BenchReport, BenchError> {
    if grid.is_empty() {
        return Err(BenchError::EmptyGrid);
    }
    if backends.is_empty() {
        return Err(BenchError::NoBackends);
    }
    let mut rows = Vec::new();
    let mut mismatched_points = Vec::new();
    for (i, spec) in grid.iter().enumerate() {
        let point_dir = work_dir.join(format!("point-{i:03}"));
        let synth = generate(spec, &point_dir)?;
        let mut reference: Option<Vec<TtmRecord>> = None;
        for &backend in backends {
            let opts = backend_options(backend, point_dir.join("store"));
            let (records, meta) = analyze(
                &synth.repo_path,
                &RangeOptions::default(),
                &opts,
                &EngineOptions::default(),
            )?;
            match &reference {
                None => reference = Some(records),
                Some(r) if *r != records => mismatched_points.push(i),
                Some(_) => {}
            }
            rows.push(BenchRow {
                hunks: meta.hunks_registered,
                developers: meta.distinct_authors,
                commits: meta.commits_total_in_range,
                backend,
                measured_seconds: meta.wall_seconds,
                predicted_seconds: None,
                residual: None,
            });
        }
        mismatched_points.dedup();
    }

    let mut report = BenchReport {
        rows,
        fits: Vec::new(),
        mismatched_points,
    };
    for &backend in backends {
        let fit = fit_alpha(&report.observations(backend));
        if let Ok(params) = &fit {
            for row in report.rows.iter_mut().filter(|r| r.backend == backend) {
                let predicted = eval_model(
                    params.alpha,
                    row.hunks.max(1) as f64,
                    row.developers.max(1) as f64,
                    row.commits.max(1) as f64,
                )
                .ok();
                row.predicted_seconds = predicted;
                row.residual = predicted.map(|p| row.measured_seconds - p);
            }
        }
        report.fits.push(BackendFit { backend, fit });
    }
    Ok(report)
}

fn backend_options(kind: BackendKind, store: PathBuf) -> BackendOptions {
    match kind {
        BackendKind::Memory => BackendOptions::memory(),
        BackendKind::Disk => BackendOptions::disk(store),
    }
}

/// Write the report CSV to `path`, creating parent directories.
pub fn save_csv(report: &BenchReport, path: &Path) -> Result<(), BenchError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    report.write_csv(fs::File::create(path)?)
}
