//! End-to-end checks of the command-line surface: flag parsing, file
//! emission, manifest digests, determinism and exit codes.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_twocenter"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("spawn twocenter");
    assert!(
        out.status.success(),
        "command {args:?} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read_manifest(dir: &Path) -> Value {
    let text = std::fs::read_to_string(dir.join("manifest.json")).expect("manifest.json");
    serde_json::from_str(&text).expect("valid manifest JSON")
}

fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

#[test]
fn equilibria_prints_the_spectrum() {
    let out = run_ok(&["equilibria", "--a", "2"]);
    let text = String::from_utf8_lossy(&out.stdout);
    // ±i/sqrt(2) and ±i sqrt(3/2) at the minima
    assert!(text.contains("1.732051"));
    assert!(text.contains("0.707107i"));
    assert!(text.contains("1.224745i"));
    assert!(text.contains("linear-center"));
    assert!(text.contains("saddle-center"));
}

#[test]
fn degenerate_parameter_exits_domain_code() {
    let out = bin().args(["equilibria", "--a", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn section_outputs_are_deterministic_and_digested() {
    let dir = tempfile::tempdir().unwrap();
    let d1 = dir.path().join("one");
    let d2 = dir.path().join("two");
    let common = [
        "section",
        "--a",
        "1.5",
        "--energy-in-es",
        "0.5",
        "--n-ic",
        "6",
        "--t-max",
        "120",
        "--seed",
        "7",
        "--svg",
    ];
    // identical command, different thread counts
    run_ok(&[&common[..], &["--out-dir", d1.to_str().unwrap(), "--threads", "1"]].concat());
    run_ok(&[&common[..], &["--out-dir", d2.to_str().unwrap(), "--threads", "2"]].concat());

    let csv1 = std::fs::read(d1.join("section.csv")).unwrap();
    let csv2 = std::fs::read(d2.join("section.csv")).unwrap();
    assert_eq!(csv1, csv2, "section CSV differs across thread counts");
    let svg1 = std::fs::read(d1.join("section.svg")).unwrap();
    let svg2 = std::fs::read(d2.join("section.svg")).unwrap();
    assert_eq!(svg1, svg2);

    // manifest digests match the files on disk
    let manifest = read_manifest(&d1);
    assert_eq!(manifest["command"], "section");
    assert_eq!(manifest["params"]["seed"], 7);
    for output in manifest["outputs"].as_array().unwrap() {
        let name = output["path"].as_str().unwrap();
        let body = std::fs::read(d1.join(name)).unwrap();
        assert_eq!(
            output["sha256"].as_str().unwrap(),
            sha256_hex(&body),
            "digest mismatch for {name}"
        );
    }

    // every point satisfies the accessible-region inequality
    let text = String::from_utf8(csv1).unwrap();
    let a: f64 = 1.5;
    let e = 0.5 * (a - 1.0_f64).powi(2);
    let potential = |y: f64| {
        let r = (1.0 + y * y).sqrt();
        (r - a) * (r - a)
    };
    for line in text.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        let (y, py) = (cols[2], cols[3]);
        assert!(2.0 * (e - potential(y)) - py * py >= -1e-12);
    }
}

#[test]
fn orbits_reproduces_published_initial_conditions() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "orbits",
        "--a",
        "sqrt(13)/3",
        "--h",
        "1",
        "--epsilon",
        "1e-2",
        "--simulate-periods",
        "1",
        "--samples-per-period",
        "32",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    let doc: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("orbits.json")).unwrap())
            .unwrap();
    assert_eq!(doc["ratio"]["l"], 3);
    assert_eq!(doc["ratio"]["j"], 2);
    let ic = &doc["branches"][0]["ic"];
    assert!((ic["x"].as_f64().unwrap() - 0.011428).abs() < 1e-5);
    assert!((ic["y"].as_f64().unwrap() - 0.663877).abs() < 1e-5);
    assert!((ic["py"].as_f64().unwrap() - 0.00379).abs() < 1e-5);
    assert_eq!(doc["branches"][0]["family"].as_array().unwrap().len(), 4);
    assert!(dir.path().join("orbit_branch_0.csv").exists());
}

#[test]
fn orbits_ratio_flag_matches_sqrt_token() {
    let dir = tempfile::tempdir().unwrap();
    let d1 = dir.path().join("ratio");
    run_ok(&[
        "orbits",
        "--ratio",
        "1:2",
        "--simulate-periods",
        "1",
        "--samples-per-period",
        "16",
        "--out-dir",
        d1.to_str().unwrap(),
    ]);
    let doc: Value =
        serde_json::from_str(&std::fs::read_to_string(d1.join("orbits.json")).unwrap()).unwrap();
    assert!((doc["a"].as_f64().unwrap() - 5.0f64.sqrt()).abs() < 1e-14);
    // two distinct orbits bifurcate: ICs at y = 2 ± eps*rho
    let ys: Vec<f64> = doc["branches"]
        .as_array()
        .unwrap()
        .iter()
        .filter_map(|b| b["ic"]["y"].as_f64())
        .collect();
    assert!(ys.iter().any(|y| (y - 2.00645).abs() < 1e-4));
    assert!(ys.iter().any(|y| (y - 1.99355).abs() < 1e-4));
}

#[test]
fn resonant_parameter_exits_domain_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "orbits",
            "--a",
            "sqrt(2)",
            "--out-dir",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("resonant"), "stderr: {err}");
}

#[test]
fn empty_region_exits_domain_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "section",
            "--a",
            "1.5",
            "--energy",
            "0",
            "--out-dir",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_two() {
    // missing the required energy group
    let out = bin().args(["section", "--a", "1.5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // malformed sqrt token
    let out = bin()
        .args(["equilibria", "--a", "sqrt(2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn potential_grid_has_the_saddle_value_at_origin() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "potential-grid",
        "--a",
        "0.5",
        "--range",
        "1",
        "--step",
        "0.25",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(dir.path().join("potential.csv")).unwrap();
    let mut origin = None;
    let mut min = f64::MAX;
    for line in text.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        min = min.min(cols[2]);
        if cols[0] == 0.0 && cols[1] == 0.0 {
            origin = Some(cols[2]);
        }
    }
    let origin = origin.expect("origin sample present");
    assert!((origin - 0.25).abs() < 1e-15);
    assert!((min - origin).abs() < 1e-15, "grid minimum not at origin");
}

#[test]
fn lyapunov_emits_series_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "lyapunov",
        "--a",
        "0",
        "--energy",
        "2",
        "--n-ic",
        "2",
        "--t-max",
        "120",
        "--seed",
        "3",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(summary.starts_with("ic_index,final_lambda\n"));
    assert_eq!(summary.lines().count(), 3);
    let series = std::fs::read_to_string(dir.path().join("lyapunov_000.csv")).unwrap();
    assert!(series.starts_with("t,lambda\n"));
    // integrable system: the final estimates are tiny
    for line in summary.lines().skip(1) {
        let lam: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(lam.abs() < 0.05);
    }
}
