use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn tdqmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tdqmc"))
        .args(args)
        .env_remove("TDQMC_THREADS")
        .output()
        .expect("binary runs")
}

fn experiment(n_particles: usize, interacting: bool, half_extent: f64) -> Value {
    json!({
        "schema_version": 1,
        "name": "test",
        "run": {
            "params": {
                "n_particles": n_particles,
                "dimension": 1,
                "screening": 0.0,
                "softening": 1.0,
                "interacting": interacting
            },
            "grid": { "dimension": 1, "half_extent": half_extent, "points_per_axis": 96 },
            "walkers": 100,
            "dt": 0.01,
            "steps": 1000,
            "regime": { "mode": "alpha", "alpha": 1.0 },
            "seed": 7
        },
        "scan": [0.8, 1.2],
        "oracle": { "half_extent": 5.0, "points_per_axis": 32 }
    })
}

fn write_config(dir: &Path, name: &str, value: &Value) -> String {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(str::to_owned).collect()
}

#[test]
fn fig1_curves_meet_at_contact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert!(tdqmc(&["fig1", "--out", out]).status.success());
    let lines = csv_lines(&dir.path().join("fig1.csv"));
    assert!(lines[0].starts_with("# config_hash: "));
    assert_eq!(lines[1], "r,long_range,short_range");
    assert_eq!(lines.len(), 2 + 601);
    let first: Vec<f64> = lines[2].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first, vec![0.0, 1.0, 1.0]);
    let last: Vec<f64> = lines.last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[0], 6.0);
    assert!(last[2] < last[1]);
}

#[test]
fn single_particle_run_reports_trap_energy() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "n1.json", &experiment(1, true, 6.0));
    let out = dir.path().join("out");
    let o = tdqmc(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let result = read_json(&out.join("result.json"));
    let e = result["energy"].as_f64().unwrap();
    assert!((e - 0.5).abs() < 1e-3, "{e}");
    assert_eq!(result["seed"], 7);
    assert_eq!(result["config_hash"].as_str().unwrap().len(), 64);
    let trace = csv_lines(&out.join("energy_trace.csv"));
    assert_eq!(
        trace[0],
        format!("# config_hash: {}", result["config_hash"].as_str().unwrap())
    );
    assert_eq!(trace[1], "step,tau,energy,stderr,s,sigma,clamped");
    assert_eq!(trace.len(), 2 + 1000);
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "n2.json", &experiment(2, true, 6.0));
    let mut traces = Vec::new();
    for (i, threads) in ["1", "1", "2"].iter().enumerate() {
        let out = dir.path().join(format!("out{i}"));
        let o = tdqmc(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--threads", threads]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        traces.push(fs::read(out.join("energy_trace.csv")).unwrap());
    }
    assert_eq!(traces[0], traces[1]);
    assert_eq!(traces[0], traces[2]);

    let out = dir.path().join("reseeded");
    let o = tdqmc(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "8"]);
    assert!(o.status.success());
    assert_ne!(fs::read(out.join("energy_trace.csv")).unwrap(), traces[0]);
}

#[test]
fn malformed_config_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut bad = experiment(1, true, 6.0);
    bad["run"].as_object_mut().unwrap().remove("walkers");
    let cfg = write_config(dir.path(), "bad.json", &bad);
    let o = tdqmc(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("walkers"));

    let mut invalid = experiment(1, true, 6.0);
    invalid["run"]["dt"] = json!(-0.1);
    let cfg = write_config(dir.path(), "invalid.json", &invalid);
    let o = tdqmc(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dt"));

    let mut version = experiment(1, true, 6.0);
    version["schema_version"] = json!(99);
    let cfg = write_config(dir.path(), "version.json", &version);
    let o = tdqmc(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("schema_version"));
}

#[test]
fn numerical_failure_exits_with_code_3_and_leaves_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    // without drift, walkers diffuse out of a ±1 box far more often than allowed
    let mut tiny = experiment(1, true, 1.0);
    tiny["run"]["drift_enabled"] = json!(false);
    let cfg = write_config(dir.path(), "tiny.json", &tiny);
    let out = dir.path().join("out");
    let o = tdqmc(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let failure = read_json(&out.join("failure.json"));
    assert!(failure["error"].as_str().unwrap().contains("left the domain"));
    let trace = failure["trace"].as_array().unwrap();
    assert_eq!(trace.len(), 1000);
    assert_eq!(trace[0]["step"], 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("failure.json"));
}

#[test]
fn scan_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "n2.json", &experiment(2, false, 6.0));
    let out = dir.path().join("cmp");
    let o = tdqmc(&["compare", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let scan = csv_lines(&out.join("alpha_scan.csv"));
    assert_eq!(scan[1], "alpha,energy,stderr,entropy,s,sigma");
    assert_eq!(scan.len(), 4);
    let result = read_json(&out.join("result.json"));
    assert_eq!(result["scan"]["alpha_irrelevant"], true);
    let cmp = read_json(&out.join("compare.json"));
    assert!((cmp["oracle_energy"].as_f64().unwrap() - 1.0).abs() < 1e-2);
    assert!(cmp["energy_rel_error"].as_f64().unwrap() < 0.02);

    // joining files computed for another system is refused
    let oracle_dir = dir.path().join("other");
    let other = write_config(dir.path(), "other.json", &experiment(2, true, 6.0));
    let o = tdqmc(&["oracle", "--config", &other, "--out", oracle_dir.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = tdqmc(&[
        "compare",
        "--config",
        &cfg,
        "--out",
        dir.path().join("joined").to_str().unwrap(),
        "--scan-result",
        out.join("result.json").to_str().unwrap(),
        "--oracle-result",
        oracle_dir.join("oracle.json").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("different physical parameters"));
}

#[test]
fn scatter_of_paired_walkers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "n2.json", &experiment(2, true, 6.0));
    let out = dir.path().join("fig2");
    let o = tdqmc(&["fig2-scatter", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let lines = csv_lines(&out.join("scatter.csv"));
    assert_eq!(lines[1], "k,r1,r2,sigma");
    assert_eq!(lines.len(), 2 + 100);

    let single = write_config(dir.path(), "n1.json", &experiment(1, true, 6.0));
    let o = tdqmc(&["fig2-scatter", "--config", &single, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_table() {
    let dir = tempfile::tempdir().unwrap();
    let template = experiment(1, true, 6.0)["run"].clone();
    let sweep = json!({
        "schema_version": 1,
        "name": "sweep",
        "template": template,
        "particle_counts": [1, 2],
        "screenings": [0.0, 3.0],
        "alphas": [1.0],
        "oracle": { "half_extent": 5.0, "points_per_axis": 32, "max_particles": 1 }
    });
    let cfg = write_config(dir.path(), "sweep.json", &sweep);
    let out = dir.path().join("fig3");
    let o = tdqmc(&["fig3", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let lines = csv_lines(&out.join("fig3.csv"));
    assert_eq!(
        lines[1],
        "dimension,n_particles,screening,alpha_opt,energy,stderr,entropy,s,oracle_energy,oracle_entropy"
    );
    assert_eq!(lines.len(), 2 + 4);
    // the reference is only computed up to max_particles
    assert!(!lines[2].ends_with(",,"));
    assert!(lines[4].ends_with(",,"));
}
