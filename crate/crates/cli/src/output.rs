//! Result files: JSON summaries and CSV tables, each tagged with the hash of
//! the configuration that produced it.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use tdqmc::solver::{AlphaScan, RunConfig, RunResult, TraceRow};

use crate::config::SCHEMA_VERSION;

pub fn ensure_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Write `rows` as CSV under a `# config_hash: …` comment line.
pub fn write_csv<T: Serialize>(path: &Path, config_hash: &str, rows: &[T]) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "# config_hash: {config_hash}")?;
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Like [`write_csv`] for rows whose columns depend on the run.
pub fn write_csv_records(
    path: &Path,
    config_hash: &str,
    header: &[String],
    records: &[Vec<String>],
) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "# config_hash: {config_hash}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in records {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
pub struct TraceCsv {
    pub step: usize,
    pub tau: f64,
    pub energy: f64,
    pub stderr: f64,
    pub s: f64,
    pub sigma: f64,
    pub clamped: usize,
}

impl From<&TraceRow> for TraceCsv {
    fn from(r: &TraceRow) -> Self {
        Self {
            step: r.step,
            tau: r.tau,
            energy: r.energy,
            stderr: r.stderr,
            s: r.s,
            sigma: r.sigma,
            clamped: r.clamped,
        }
    }
}

/// Scalars of one relaxation, as stored in `result.json`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub name: String,
    pub config_hash: String,
    pub physics_hash: String,
    pub seed: u64,
    pub config: RunConfig,
    pub energy: f64,
    pub error: f64,
    pub linear_entropy: f64,
    pub entropy_per_particle: Vec<f64>,
    pub s: Vec<f64>,
    /// `null` in the mean-field limit.
    pub sigma: Vec<Option<f64>>,
    pub clamp_count: usize,
    pub moves: usize,
    pub clamped_fraction: f64,
    pub excluded_count: usize,
    pub unreliable_steps: usize,
    pub wall_time: f64,
}

impl RunSummary {
    pub fn new(name: &str, config_hash: &str, physics_hash: &str, r: &RunResult) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            name: name.to_owned(),
            config_hash: config_hash.to_owned(),
            physics_hash: physics_hash.to_owned(),
            seed: r.config.seed,
            config: r.config.clone(),
            energy: r.energy,
            error: r.error,
            linear_entropy: r.linear_entropy,
            entropy_per_particle: r.entropy_per_particle.clone(),
            s: r.s.clone(),
            sigma: r.sigma.iter().map(|s| s.is_finite().then_some(*s)).collect(),
            clamp_count: r.clamp_count,
            moves: r.moves,
            clamped_fraction: r.clamped_fraction(),
            excluded_count: r.excluded_count,
            unreliable_steps: r.unreliable_steps,
            wall_time: r.wall_time,
        }
    }
}

/// `result.json` of a scan.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanSummary {
    pub schema_version: u32,
    pub name: String,
    pub config_hash: String,
    pub physics_hash: String,
    pub seed: u64,
    pub config: RunConfig,
    pub scan: AlphaScan,
}

pub fn path_in(dir: &Path, file: &str) -> PathBuf {
    dir.join(file)
}
