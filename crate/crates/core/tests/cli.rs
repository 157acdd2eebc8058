use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_wulffmc");

const SMALL: &str = r#"[system]
dimension = 2
particles = 12
beta = 2.0
pressure = 3.0

[[shapes]]
family = "disk"

[schedule]
burn_in = 200
sweeps = 800
thin = 5
blocks = 8

[run]
replicas = 2
seed = 5
"#;

fn wulffmc(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).current_dir(dir).env_remove("WULFFMC_OUTPUT_ROOT").args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

fn with_hexagon(text: &str) -> String {
    text.replace("[schedule]", "[[shapes]]\nfamily = \"hexagon\"\n\n[schedule]")
}

#[test]
fn simulate_is_byte_reproducible() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "run.toml", SMALL);
    for out in ["a", "b"] {
        let o = wulffmc(tmp.path(), &["simulate", "run.toml", "--output-dir", out]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for file in ["trajectory.csv", "summary.json", "snapshot_final.txt", "snapshot.svg", "config.toml"] {
        let a = fs::read(tmp.path().join("a").join(file)).unwrap();
        let b = fs::read(tmp.path().join("b").join(file)).unwrap();
        assert!(a == b, "{file} differs");
    }
    let traj = fs::read_to_string(tmp.path().join("a/trajectory.csv")).unwrap();
    assert!(traj.contains("# schema_version: 1"));
    assert!(traj.contains("seeds: "));
    assert!(traj.lines().any(|l| l == "sweep,potential_energy,volume,displacement_acceptance,volume_acceptance"));
    assert_eq!(traj.lines().filter(|l| !l.starts_with('#')).count(), 1 + 800 / 5);
}

#[test]
fn different_seed_changes_trajectory() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "run.toml", SMALL);
    assert!(wulffmc(tmp.path(), &["simulate", "run.toml", "--output-dir", "a"]).status.success());
    assert!(wulffmc(tmp.path(), &["simulate", "run.toml", "--output-dir", "b", "--seed", "6"]).status.success());
    let a = fs::read(tmp.path().join("a/trajectory.csv")).unwrap();
    let b = fs::read(tmp.path().join("b/trajectory.csv")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn single_particle_summary_has_zero_potential() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "one.toml", &SMALL.replace("particles = 12", "particles = 1"));
    let o = wulffmc(tmp.path(), &["simulate", "one.toml", "--output-dir", "out"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("out/summary.json")).unwrap()).unwrap();
    let text = doc.to_string();
    assert!(text.contains("potential_energy"));
    assert!(doc["provenance"]["seeds"].is_array());
    assert!(!text.to_lowercase().contains("timestamp"));
}

#[test]
fn ideal_flag_reports_analytic_volume() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "run.toml", &SMALL.replace("sweeps = 800", "sweeps = 20000"));
    let o = wulffmc(tmp.path(), &["simulate", "run.toml", "--ideal", "--output-dir", "out"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("out/summary.json")).unwrap()).unwrap();
    let text = doc.to_string();
    assert!(text.contains("ideal_gas_volume"), "{text}");
}

#[test]
fn compare_writes_tables() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "cmp.toml", &with_hexagon(SMALL));
    let o = wulffmc(tmp.path(), &["compare", "cmp.toml", "--output-dir", "out"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("co-minimal"));
    for f in ["comparison_estimates.csv", "comparison_pairs.csv", "comparison.json", "shapes.svg"] {
        assert!(tmp.path().join("out").join(f).exists(), "{f}");
    }
    let pairs = fs::read_to_string(tmp.path().join("out/comparison_pairs.csv")).unwrap();
    let row = pairs.lines().filter(|l| !l.starts_with('#')).nth(1).unwrap();
    assert!(["LOWER", "HIGHER", "INDISTINGUISHABLE"].iter().any(|v| row.ends_with(v)), "{row}");
}

#[test]
fn scan_over_two_pressures() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "scan.toml", &with_hexagon(SMALL).replace("pressure = 3.0", "pressure = [1.0, 4.0]"));
    let o = wulffmc(tmp.path(), &["scan", "scan.toml", "--output-dir", "out"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let pairs = fs::read_to_string(tmp.path().join("out/scan_pairs.csv")).unwrap();
    assert_eq!(pairs.lines().filter(|l| !l.starts_with('#')).count(), 3);
    let trends = fs::read_to_string(tmp.path().join("out/scan_trends.csv")).unwrap();
    let header = trends.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.contains("trend"));
    assert!(tmp.path().join("out/delta_vs_pressure.svg").exists());
}

#[test]
fn search_smoke() {
    let tmp = TempDir::new().unwrap();
    let text = format!("{}\n[search]\niterations = 2\nreplicas = 2\n", SMALL.replace("beta = 2.0", "beta = 0.5"));
    write(tmp.path(), "search.toml", &text);
    let o = wulffmc(tmp.path(), &["search", "search.toml", "--output-dir", "out"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["search_trace.csv", "search.json", "best_shape.json", "best_shape.svg"] {
        assert!(tmp.path().join("out").join(f).exists(), "{f}");
    }
}

#[test]
fn oracle_prints_values() {
    let tmp = TempDir::new().unwrap();
    let o = wulffmc(tmp.path(), &["oracle", "--spacing", "1,3.1"]);
    assert!(o.status.success());
    let out = String::from_utf8_lossy(&o.stdout);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "1 -14.929339710905825");
    assert_eq!(lines[1], "3.1 0");
    assert!(out.contains("spacing 1 "));
    // No files unless a directory is given.
    assert_eq!(fs::read_dir(tmp.path()).unwrap().count(), 0);
}

#[test]
fn validate_config_echoes_defaults() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "min.toml", "[system]\ndimension = 2\nparticles = 64\nbeta = 5\npressure = 2\n\n[[shapes]]\nfamily = \"ball\"\n");
    let o = wulffmc(tmp.path(), &["validate-config", "min.toml"]);
    assert!(o.status.success());
    let echoed = String::from_utf8_lossy(&o.stdout);
    for key in ["burn_in", "sweeps", "thin", "blocks", "acceptance_window", "replicas"] {
        assert!(echoed.contains(key), "{key} missing");
    }
    write(tmp.path(), "echo.toml", &echoed);
    let again = wulffmc(tmp.path(), &["validate-config", "echo.toml"]);
    assert_eq!(again.stdout, o.stdout);
}

#[test]
fn usage_errors_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "one.toml", SMALL);
    let o = wulffmc(tmp.path(), &["compare", "one.toml", "--output-dir", "out"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("2"));

    write(tmp.path(), "bad.toml", &SMALL.replace("thin = 5", "thin = 5\nthinning = 2"));
    let o = wulffmc(tmp.path(), &["simulate", "bad.toml"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 14") && err.contains("thinning"), "{err}");

    write(tmp.path(), "mismatch.toml", &SMALL.replace("family = \"disk\"", "family = \"cuboctahedron\""));
    let o = wulffmc(tmp.path(), &["simulate", "mismatch.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 8"));

    assert_eq!(wulffmc(tmp.path(), &["simulate", "missing.toml"]).status.code(), Some(2));
    assert_eq!(wulffmc(tmp.path(), &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_three() {
    let tmp = TempDir::new().unwrap();
    let text = format!("{SMALL}\n[init]\nvolume_factor = 0.2\nattempts_per_particle = 3\n");
    write(tmp.path(), "dense.toml", &text);
    let o = wulffmc(tmp.path(), &["simulate", "dense.toml", "--output-dir", "out"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("initial volume factor"));
}

#[test]
fn output_root_from_environment() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "envrun.toml", SMALL);
    let o = Command::new(BIN)
        .current_dir(tmp.path())
        .env("WULFFMC_OUTPUT_ROOT", tmp.path().join("results"))
        .args(["simulate", "envrun.toml"])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(tmp.path().join("results/envrun/trajectory.csv").exists());
    // Nothing else is written next to the config.
    let names: Vec<String> =
        fs::read_dir(tmp.path()).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    assert_eq!(names.len(), 2, "{names:?}");
}
