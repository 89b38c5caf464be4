use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use tdqmc::model::{PhysicalParams, SHORT_RANGE_SCREENING};
use tdqmc::oracle::{self, OracleSummary};
use tdqmc::solver::{alpha_scan, relax_with_trace, AlphaScan, RunConfig, RunResult};

use crate::config::{
    hash_of, load_experiment, load_sweep, physics_hash, ConfigError, Experiment, OracleSettings, SCHEMA_VERSION,
};
use crate::output::{
    ensure_dir, path_in, write_csv, write_csv_records, write_json, RunSummary, ScanSummary, TraceCsv,
};
use crate::Common;

fn out_dir(common: &Common, configured: Option<&Path>, name: &str) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| configured.map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("out").join(name))
}

fn experiment(path: &Path, common: &Common) -> anyhow::Result<(Experiment, PathBuf, String)> {
    let mut exp = load_experiment(path)?;
    if let Some(seed) = common.seed {
        exp.run.seed = seed;
    }
    let dir = out_dir(common, exp.output_dir.as_deref(), &exp.name);
    ensure_dir(&dir)?;
    let hash = hash_of(&exp);
    Ok((exp, dir, hash))
}

#[derive(Serialize)]
struct Failure<'a> {
    config_hash: &'a str,
    error: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    trace: Vec<TraceCsv>,
}

/// Record a numerical failure next to the outputs and point the error at it.
fn diagnose<T>(dir: &Path, hash: &str, result: tdqmc::Result<T>) -> anyhow::Result<T> {
    diagnose_traced(dir, hash, result.map_err(|e| (e, Vec::new())))
}

fn diagnose_traced<T>(
    dir: &Path,
    hash: &str,
    result: Result<T, (tdqmc::Error, Vec<TraceCsv>)>,
) -> anyhow::Result<T> {
    match result {
        Ok(v) => Ok(v),
        Err((e @ (tdqmc::Error::Config(_) | tdqmc::Error::Invalid(_)), _)) => Err(e.into()),
        Err((e, trace)) => {
            let path = path_in(dir, "failure.json");
            let written = write_json(
                &path,
                &Failure {
                    config_hash: hash,
                    error: e.to_string(),
                    trace,
                },
            );
            let note = match written {
                Ok(()) => format!("diagnostic written to {}", path.display()),
                Err(w) => format!("could not write diagnostic: {w:#}"),
            };
            Err(anyhow::Error::new(e).context(note))
        }
    }
}

/// A single relaxation; on failure the trace so far goes into `failure.json`.
fn relax(dir: &Path, hash: &str, config: &RunConfig) -> anyhow::Result<RunResult> {
    let result = relax_with_trace(config)
        .map_err(|a| (a.error, a.trace.iter().map(TraceCsv::from).collect()));
    diagnose_traced(dir, hash, result)
}

pub fn run(path: &Path, common: &Common) -> anyhow::Result<()> {
    let (exp, dir, hash) = experiment(path, common)?;
    let result = relax(&dir, &hash, &exp.run)?;
    let summary = RunSummary::new(&exp.name, &hash, &physics_hash(&exp.run.params), &result);
    write_json(&path_in(&dir, "result.json"), &summary)?;
    let rows: Vec<TraceCsv> = result.trace.iter().map(TraceCsv::from).collect();
    write_csv(&path_in(&dir, "energy_trace.csv"), &hash, &rows)?;
    println!(
        "E = {:.6} ± {:.6} hartree, S_L = {:.5}, clamped {:.4}% ({})",
        result.energy,
        result.error,
        result.linear_entropy,
        100.0 * result.clamped_fraction(),
        dir.display()
    );
    Ok(())
}

fn run_scan(exp: &Experiment, dir: &Path, hash: &str) -> anyhow::Result<AlphaScan> {
    let scan = diagnose(dir, hash, alpha_scan(&exp.run, &exp.alphas()))?;
    write_csv(&path_in(dir, "alpha_scan.csv"), hash, &scan.rows)?;
    let summary = ScanSummary {
        schema_version: SCHEMA_VERSION,
        name: exp.name.clone(),
        config_hash: hash.to_owned(),
        physics_hash: physics_hash(&exp.run.params),
        seed: exp.run.seed,
        config: exp.run.clone(),
        scan: scan.clone(),
    };
    write_json(&path_in(dir, "result.json"), &summary)?;
    Ok(scan)
}

pub fn scan(path: &Path, common: &Common) -> anyhow::Result<()> {
    let (exp, dir, hash) = experiment(path, common)?;
    let scan = run_scan(&exp, &dir, &hash)?;
    let best = scan.best();
    println!(
        "alpha_opt = {} (E = {:.6} ± {:.6}){}{}",
        scan.alpha_opt,
        best.energy,
        best.stderr,
        if scan.alpha_irrelevant { ", alpha has no effect for this system" } else { "" },
        if scan.non_convex { ", scan is not convex" } else { "" },
    );
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct OracleFile {
    schema_version: u32,
    config_hash: String,
    physics_hash: String,
    settings: OracleSettings,
    #[serde(flatten)]
    summary: OracleSummary,
}

fn run_oracle(params: &PhysicalParams, settings: &OracleSettings, dir: &Path, hash: &str) -> anyhow::Result<OracleSummary> {
    let grid = settings.grid(params.dimension)?;
    let summary = diagnose(dir, hash, oracle::reference(params, &grid, settings.max_steps))?;
    if !summary.converged {
        eprintln!("warning: oracle stopped after {} steps without converging", summary.steps);
    }
    Ok(summary)
}

pub fn oracle(path: &Path, common: &Common) -> anyhow::Result<()> {
    let (exp, dir, hash) = experiment(path, common)?;
    let settings = exp.oracle_settings();
    let summary = run_oracle(&exp.run.params, &settings, &dir, &hash)?;
    write_json(
        &path_in(&dir, "oracle.json"),
        &OracleFile {
            schema_version: SCHEMA_VERSION,
            config_hash: hash.clone(),
            physics_hash: physics_hash(&exp.run.params),
            settings,
            summary: summary.clone(),
        },
    )?;
    println!("E = {:.8} hartree, S_L = {:.6}", summary.energy, summary.linear_entropy);
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
struct CompareRow {
    n_particles: usize,
    dimension: usize,
    screening: f64,
    alpha_opt: f64,
    energy: f64,
    stderr: f64,
    entropy: f64,
    oracle_energy: f64,
    oracle_entropy: f64,
    energy_rel_error: f64,
    entropy_abs_error: f64,
}

impl CompareRow {
    fn new(params: &PhysicalParams, scan: &AlphaScan, reference: &OracleSummary) -> Self {
        let best = scan.best();
        Self {
            n_particles: params.n_particles,
            dimension: params.dimension,
            screening: params.screening,
            alpha_opt: scan.alpha_opt,
            energy: best.energy,
            stderr: best.stderr,
            entropy: best.entropy,
            oracle_energy: reference.energy,
            oracle_entropy: reference.linear_entropy,
            energy_rel_error: (best.energy - reference.energy).abs() / reference.energy.abs(),
            entropy_abs_error: (best.entropy - reference.linear_entropy).abs(),
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())).into())
}

pub fn compare(path: &Path, common: &Common, existing: Option<(PathBuf, PathBuf)>) -> anyhow::Result<()> {
    let (exp, dir, hash) = experiment(path, common)?;
    let expected = physics_hash(&exp.run.params);
    let (scan, reference) = match existing {
        Some((scan_path, oracle_path)) => {
            let scan: ScanSummary = read_json(&scan_path)?;
            let reference: OracleFile = read_json(&oracle_path)?;
            for (what, found) in [("scan", &scan.physics_hash), ("oracle", &reference.physics_hash)] {
                if *found != expected {
                    return Err(ConfigError(format!(
                        "{what} result was computed for different physical parameters (physics hash {found}, expected {expected})"
                    ))
                    .into());
                }
            }
            (scan.scan, reference.summary)
        }
        None => {
            let scan = run_scan(&exp, &dir, &hash)?;
            let reference = run_oracle(&exp.run.params, &exp.oracle_settings(), &dir, &hash)?;
            (scan, reference)
        }
    };
    let row = CompareRow::new(&exp.run.params, &scan, &reference);
    write_csv(&path_in(&dir, "compare.csv"), &hash, std::slice::from_ref(&row))?;
    #[derive(Serialize)]
    struct CompareFile<'a> {
        schema_version: u32,
        config_hash: &'a str,
        physics_hash: &'a str,
        #[serde(flatten)]
        row: &'a CompareRow,
    }
    write_json(
        &path_in(&dir, "compare.json"),
        &CompareFile {
            schema_version: SCHEMA_VERSION,
            config_hash: &hash,
            physics_hash: &expected,
            row: &row,
        },
    )?;
    println!(
        "TDQMC E = {:.6} (alpha_opt {}), exact E = {:.6}, relative error {:.3}%; S_L {:.5} vs {:.5}",
        row.energy,
        row.alpha_opt,
        row.oracle_energy,
        100.0 * row.energy_rel_error,
        row.entropy,
        row.oracle_entropy
    );
    Ok(())
}

#[derive(Serialize)]
struct Fig1Row {
    r: f64,
    long_range: f64,
    short_range: f64,
}

/// Separations sampled for the potential curves.
const FIG1_POINTS: usize = 601;
const FIG1_RANGE: f64 = 6.0;

pub fn fig1(common: &Common) -> anyhow::Result<()> {
    let dir = out_dir(common, None, "fig1");
    ensure_dir(&dir)?;
    let lr = PhysicalParams::long_range(2, 1)?;
    let sr = PhysicalParams::short_range(2, 1)?;
    let hash = hash_of(&(lr, sr, FIG1_POINTS, FIG1_RANGE));
    let rows: Vec<Fig1Row> = (0..FIG1_POINTS)
        .map(|i| {
            let r = FIG1_RANGE * i as f64 / (FIG1_POINTS - 1) as f64;
            Fig1Row {
                r,
                long_range: lr.pair_energy(r),
                short_range: sr.pair_energy(r),
            }
        })
        .collect();
    write_csv(&path_in(&dir, "fig1.csv"), &hash, &rows)?;
    println!(
        "wrote {} (a = 0 and a = {SHORT_RANGE_SCREENING}, b = 1)",
        path_in(&dir, "fig1.csv").display()
    );
    Ok(())
}

pub fn fig2_scatter(path: &Path, common: &Common) -> anyhow::Result<()> {
    let (exp, dir, hash) = experiment(path, common)?;
    if exp.run.params.n_particles < 2 {
        return Err(ConfigError("run.params.n_particles: fig2-scatter needs at least 2 particles".into()).into());
    }
    let result = relax(&dir, &hash, &exp.run)?;
    let d = exp.run.params.dimension;
    let axes = ["x", "y"];
    let mut header = vec!["k".to_owned()];
    for particle in 1..=2 {
        for axis in &axes[..d] {
            header.push(if d == 1 { format!("r{particle}") } else { format!("r{particle}_{axis}") });
        }
    }
    header.push("sigma".to_owned());
    let sigma = result.sigma[1];
    let records: Vec<Vec<String>> = (0..exp.run.walkers)
        .map(|k| {
            let mut rec = vec![k.to_string()];
            for cloud in &result.clouds[..2] {
                rec.extend(cloud.position(k).iter().map(|x| x.to_string()));
            }
            rec.push(sigma.to_string());
            rec
        })
        .collect();
    write_csv_records(&path_in(&dir, "scatter.csv"), &hash, &header, &records)?;
    println!("wrote {} walker pairs, sigma = {sigma}", records.len());
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
struct Fig3Row {
    dimension: usize,
    n_particles: usize,
    screening: f64,
    alpha_opt: f64,
    energy: f64,
    stderr: f64,
    entropy: f64,
    s: f64,
    oracle_energy: Option<f64>,
    oracle_entropy: Option<f64>,
}

pub fn fig3(path: &Path, common: &Common) -> anyhow::Result<()> {
    let mut sweep = load_sweep(path)?;
    if let Some(seed) = common.seed {
        sweep.template.seed = seed;
    }
    let dir = out_dir(common, None, &sweep.name);
    ensure_dir(&dir)?;
    let hash = hash_of(&sweep);
    let alphas = sweep.alphas();
    let mut rows = Vec::new();
    for &n in &sweep.particle_counts {
        for &a in &sweep.screenings {
            let run: RunConfig = sweep.run_for(n, a)?;
            let scan = diagnose(&dir, &hash, alpha_scan(&run, &alphas))?;
            let best = *scan.best();
            let reference = match &sweep.oracle {
                Some(o) if n <= o.max_particles => Some(run_oracle(&run.params, o, &dir, &hash)?),
                _ => None,
            };
            eprintln!("N = {n}, a = {a}: alpha_opt = {}, E = {:.5}", scan.alpha_opt, best.energy);
            rows.push(Fig3Row {
                dimension: run.params.dimension,
                n_particles: n,
                screening: a,
                alpha_opt: scan.alpha_opt,
                energy: best.energy,
                stderr: best.stderr,
                entropy: best.entropy,
                s: best.s,
                oracle_energy: reference.as_ref().map(|r| r.energy),
                oracle_entropy: reference.as_ref().map(|r| r.linear_entropy),
            });
        }
    }
    write_csv(&path_in(&dir, "fig3.csv"), &hash, &rows)?;
    #[derive(Serialize)]
    struct Fig3File<'a> {
        schema_version: u32,
        config_hash: &'a str,
        rows: &'a [Fig3Row],
    }
    write_json(
        &path_in(&dir, "fig3.json"),
        &Fig3File {
            schema_version: SCHEMA_VERSION,
            config_hash: &hash,
            rows: &rows,
        },
    )?;
    println!("wrote {} rows to {}", rows.len(), dir.display());
    Ok(())
}
