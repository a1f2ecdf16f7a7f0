//! Runs every cell of an [`ExperimentMatrix`] and persists the results:
//! `summary.csv` (one row per cell), optional per-handover CSVs under
//! `records/`, and `manifest.json` holding the effective config and seeds.

use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{parse_config_str, Cell, ConfigError, ExperimentMatrix};
use crate::engine::{
    replication_seed, run_replications, run_replications_sequential, EngineError, HandoverRecord, ReplicationOutcome,
    RunSummary,
};

pub const SUMMARY_FILE: &str = "summary.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const RECORDS_DIR: &str = "records";

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("cell {cell}: {source}")]
    Engine {
        cell: String,
        #[source]
        source: EngineError,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {message}")]
    Manifest { path: String, message: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> SweepError + '_ {
    move |source| SweepError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> SweepError + '_ {
    move |source| SweepError::Csv {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub model: String,
    pub policy: String,
    pub cl_limit: f64,
    pub jitter_fraction: f64,
    pub k_used: usize,
    pub replications: usize,
    pub handovers_total: usize,
    pub correct_total: usize,
    pub percent_correct_mean: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub fallback_rate: f64,
}

impl SummaryRow {
    pub fn new(cell: &Cell, s: &RunSummary) -> Self {
        Self {
            model: cell.model.name().to_owned(),
            policy: cell.policy.as_str().to_owned(),
            cl_limit: cell.cl_limit,
            jitter_fraction: cell.jitter_fraction,
            k_used: cell.k_used,
            replications: s.replications,
            handovers_total: s.handovers_total,
            correct_total: s.correct_total,
            percent_correct_mean: s.percent_correct_mean,
            ci95_low: s.ci95_low,
            ci95_high: s.ci95_high,
            fallback_rate: s.fallback_rate,
        }
    }
}

/// One executed handover. Scores belong to the selected eNB and are empty
/// under the signal-only policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordRow {
    pub replication: usize,
    pub step: usize,
    pub serving: u32,
    pub selected: u32,
    pub ground_truth: u32,
    pub correct: bool,
    pub fallback: String,
    pub s_om: Option<f64>,
    pub s_cl: Option<f64>,
    pub s_rss: Option<f64>,
    pub s_was: Option<f64>,
}

impl RecordRow {
    pub fn new(replication: usize, r: &HandoverRecord) -> Self {
        let w = r.winner();
        Self {
            replication,
            step: r.step,
            serving: r.serving.0,
            selected: r.selected.0,
            ground_truth: r.ground_truth.0,
            correct: r.correct,
            fallback: r.fallback.map(|f| f.as_str().to_owned()).unwrap_or_default(),
            s_om: w.and_then(|c| c.s_om),
            s_cl: w.and_then(|c| c.s_cl),
            s_rss: w.and_then(|c| c.s_rss),
            s_was: w.and_then(|c| c.s_was),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestCell {
    pub key: String,
    pub replication_seeds: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub records: Option<String>,
}

/// Everything needed to regenerate the result files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub generator: String,
    pub master_seed: u64,
    /// Effective configuration in config-file syntax.
    pub config: String,
    pub summary: String,
    pub cells: Vec<ManifestCell>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self, SweepError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|e| SweepError::Manifest {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn matrix(&self) -> Result<ExperimentMatrix, SweepError> {
        Ok(parse_config_str(&self.config, Path::new("."), "manifest config")?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Replications of a cell run on the rayon pool when available.
    #[default]
    Parallel,
    Sequential,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixOutput {
    pub summary: PathBuf,
    pub manifest: PathBuf,
    pub records: Vec<PathBuf>,
    pub rows: Vec<SummaryRow>,
}

fn run_cell(m: &ExperimentMatrix, cell: &Cell, exec: Execution) -> Result<Vec<ReplicationOutcome>, SweepError> {
    let config = m.cell_config(cell);
    let result = match exec {
        Execution::Parallel => run_replications(&config),
        Execution::Sequential => run_replications_sequential(&config),
    };
    result.map_err(|source| SweepError::Engine {
        cell: cell.slug(),
        source,
    })
}

/// Summary rows of every cell without touching the filesystem.
pub fn summarize_matrix(m: &ExperimentMatrix, exec: Execution) -> Result<Vec<SummaryRow>, SweepError> {
    m.cells()
        .iter()
        .map(|cell| {
            let outcomes = run_cell(m, cell, exec)?;
            Ok(SummaryRow::new(cell, &RunSummary::from_outcomes(&outcomes)))
        })
        .collect()
}

/// Runs the matrix into `m.output_dir`.
pub fn run_matrix(m: &ExperimentMatrix) -> Result<MatrixOutput, SweepError> {
    run_matrix_in(m, &m.output_dir, Execution::Parallel)
}

/// Runs the matrix into `out_dir`. Summary rows are flushed as each cell
/// finishes.
pub fn run_matrix_in(m: &ExperimentMatrix, out_dir: &Path, exec: Execution) -> Result<MatrixOutput, SweepError> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let summary_path = out_dir.join(SUMMARY_FILE);
    let mut summary = csv::Writer::from_path(&summary_path).map_err(csv_err(&summary_path))?;
    let records_dir = out_dir.join(RECORDS_DIR);
    if m.write_records {
        fs::create_dir_all(&records_dir).map_err(io_err(&records_dir))?;
    }

    let mut rows = Vec::new();
    let mut record_files = Vec::new();
    let mut cells = Vec::new();
    for cell in m.cells() {
        let outcomes = run_cell(m, &cell, exec)?;
        let row = SummaryRow::new(&cell, &RunSummary::from_outcomes(&outcomes));
        summary.serialize(&row).map_err(csv_err(&summary_path))?;
        summary.flush().map_err(io_err(&summary_path))?;
        rows.push(row);

        let mut records_name = None;
        if m.write_records {
            let name = format!("{}.csv", cell.slug());
            let path = records_dir.join(&name);
            write_records(&path, &outcomes)?;
            record_files.push(path);
            records_name = Some(format!("{RECORDS_DIR}/{name}"));
        }
        let config = m.cell_config(&cell);
        cells.push(ManifestCell {
            key: cell.slug(),
            replication_seeds: (0..config.replications)
                .map(|r| replication_seed(config.master_seed, r))
                .collect(),
            records: records_name,
        });
    }
    drop(summary);

    let manifest = Manifest {
        generator: format!("handover-core {}", env!("CARGO_PKG_VERSION")),
        master_seed: m.base.master_seed,
        config: m.to_toml(),
        summary: SUMMARY_FILE.to_owned(),
        cells,
    };
    let manifest_path = out_dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    let mut f = File::create(&manifest_path).map_err(io_err(&manifest_path))?;
    writeln!(f, "{json}").map_err(io_err(&manifest_path))?;

    Ok(MatrixOutput {
        summary: summary_path,
        manifest: manifest_path,
        records: record_files,
        rows,
    })
}

fn write_records(path: &Path, outcomes: &[ReplicationOutcome]) -> Result<(), SweepError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    // header even when no handover happened
    if outcomes.iter().all(|o| o.records.is_empty()) {
        w.write_record([
            "replication",
            "step",
            "serving",
            "selected",
            "ground_truth",
            "correct",
            "fallback",
            "s_om",
            "s_cl",
            "s_rss",
            "s_was",
        ])
        .map_err(csv_err(path))?;
    }
    for o in outcomes {
        for r in &o.records {
            w.serialize(RecordRow::new(o.index, r)).map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(io_err(path))
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>, SweepError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize().map(|row| row.map_err(csv_err(path))).collect()
}

pub fn read_records(path: &Path) -> Result<Vec<RecordRow>, SweepError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize().map(|row| row.map_err(csv_err(path))).collect()
}
