//! On-disk experiment and sweep descriptions.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tdqmc::grid::Grid;
use tdqmc::model::PhysicalParams;
use tdqmc::solver::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// Default scan grid: 0.4 to 2.0 in steps of 0.1.
pub fn default_alphas() -> Vec<f64> {
    (4..=20).map(|i| i as f64 / 10.0).collect()
}

/// A malformed or inconsistent input file. Maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSettings {
    pub half_extent: f64,
    pub points_per_axis: usize,
    #[serde(default = "default_oracle_steps")]
    pub max_steps: usize,
    /// Sweeps skip the reference above this many particles.
    #[serde(default = "default_oracle_particles")]
    pub max_particles: usize,
}

fn default_oracle_steps() -> usize {
    200_000
}

fn default_oracle_particles() -> usize {
    4
}

impl OracleSettings {
    /// `n = 64` in 1D and `32` in 2D over the run's extent.
    pub fn matching(run: &RunConfig) -> Self {
        Self {
            half_extent: run.grid.half_extent,
            points_per_axis: if run.grid.dimension == 1 { 64 } else { 32 },
            max_steps: default_oracle_steps(),
            max_particles: if run.grid.dimension == 1 { 4 } else { 2 },
        }
    }

    pub fn grid(&self, dimension: usize) -> tdqmc::Result<Grid> {
        Grid::new(dimension, self.half_extent, self.points_per_axis)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    pub schema_version: u32,
    pub name: String,
    pub run: RunConfig,
    #[serde(default)]
    pub scan: Option<Vec<f64>>,
    #[serde(default)]
    pub oracle: Option<OracleSettings>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl Experiment {
    pub fn alphas(&self) -> Vec<f64> {
        self.scan.clone().unwrap_or_else(default_alphas)
    }

    pub fn oracle_settings(&self) -> OracleSettings {
        self.oracle.clone().unwrap_or_else(|| OracleSettings::matching(&self.run))
    }

    fn validate(&self) -> Result<(), ConfigError> {
        check_schema(self.schema_version)?;
        if self.name.trim().is_empty() {
            return Err(ConfigError("name: must not be empty".into()));
        }
        self.run
            .validate()
            .map_err(|e| ConfigError(format!("run: {e}")))?;
        if let Some(alphas) = &self.scan {
            if alphas.is_empty() || alphas.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
                return Err(ConfigError("scan: alphas must be a non-empty list of positive numbers".into()));
            }
        }
        if let Some(o) = &self.oracle {
            o.grid(self.run.params.dimension)
                .map_err(|e| ConfigError(format!("oracle: {e}")))?;
        }
        Ok(())
    }
}

/// A grid of runs over particle number and screening, for the summary table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub schema_version: u32,
    pub name: String,
    /// Settings shared by every run; `params.n_particles` and
    /// `params.screening` are overridden per row.
    pub template: RunConfig,
    pub particle_counts: Vec<usize>,
    pub screenings: Vec<f64>,
    #[serde(default)]
    pub alphas: Option<Vec<f64>>,
    #[serde(default)]
    pub oracle: Option<OracleSettings>,
}

impl Sweep {
    pub fn alphas(&self) -> Vec<f64> {
        self.alphas.clone().unwrap_or_else(default_alphas)
    }

    pub fn run_for(&self, n_particles: usize, screening: f64) -> Result<RunConfig, ConfigError> {
        let mut run = self.template.clone();
        run.params = PhysicalParams {
            n_particles,
            screening,
            ..run.params
        };
        run.validate()
            .map_err(|e| ConfigError(format!("template (N = {n_particles}, a = {screening}): {e}")))?;
        Ok(run)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        check_schema(self.schema_version)?;
        if self.particle_counts.is_empty() || self.screenings.is_empty() {
            return Err(ConfigError("particle_counts and screenings must be non-empty".into()));
        }
        for &n in &self.particle_counts {
            for &a in &self.screenings {
                self.run_for(n, a)?;
            }
        }
        Ok(())
    }
}

fn check_schema(version: u32) -> Result<(), ConfigError> {
    if version != SCHEMA_VERSION {
        return Err(ConfigError(format!(
            "schema_version: expected {SCHEMA_VERSION}, got {version}"
        )));
    }
    Ok(())
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())).into())
}

pub fn load_experiment(path: &Path) -> anyhow::Result<Experiment> {
    let text = read(path)?;
    let exp: Experiment = serde_json::from_str(&text)
        .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    exp.validate()?;
    Ok(exp)
}

pub fn load_sweep(path: &Path) -> anyhow::Result<Sweep> {
    let text = read(path)?;
    let sweep: Sweep = serde_json::from_str(&text)
        .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    sweep.validate()?;
    Ok(sweep)
}

/// Hex SHA-256 of the compact JSON form of `value`.
pub fn hash_of<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("config serializes");
    hex::encode(Sha256::digest(json))
}

/// Hash of the physical system only, used to refuse joining unrelated results.
pub fn physics_hash(params: &PhysicalParams) -> String {
    hash_of(params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shipped(name: &str) -> std::path::PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
    }

    #[test]
    fn shipped_configs_load() {
        let one = load_experiment(&shipped("two_bosons_1d.json")).unwrap();
        assert_eq!(one.run.params.n_particles, 2);
        let two = load_experiment(&shipped("two_bosons_2d.json")).unwrap();
        assert_eq!(two.run.grid.dimension, 2);
        let sweep = load_sweep(&shipped("sweep_1d.json")).unwrap();
        assert!(!sweep.particle_counts.is_empty());
    }
}
