use std::path::Path;
use std::process::{Command, Output};

use everett_cli::RunConfig;
use serde_json::Value;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_everett-lab")).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(str::to_owned).collect()).collect()
}

const AXES: &str = "scenario.axes.n1.theta = 0.0\nscenario.axes.n1.phi = 0.0\n\
                    scenario.axes.n2.theta = 1.5707963267948966\nscenario.axes.n2.phi = 0.0\n";

#[test]
fn algebra_check_passes_and_names_injected_fault() {
    let ok = lab(&["algebra-check", "--quiet"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "fault.toml", "algebra.fault = true\n");
    let bad = lab(&["algebra-check", "--config", &cfg]);
    assert_eq!(bad.status.code(), Some(1));
    let msg = stderr(&bad);
    assert!(msg.contains("identity fails for pair (") && msg.contains("cell"), "{msg}");
}

#[test]
fn run_eprb_writes_record_and_densities() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", AXES);
    let out = dir.path().join("out");
    let o = lab(&["run-eprb", "--config", &cfg, "--out", out.to_str().unwrap(), "--backend", "both", "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rec: Value = serde_json::from_str(&std::fs::read_to_string(out.join("record.json")).unwrap()).unwrap();
    for p in rec["probabilities"].as_array().unwrap() {
        let v = p["probability"].as_f64().unwrap();
        assert!((0.0..=1.0 + 1e-9).contains(&v));
        if p["window"] == "t23" && p["label"] == 1 {
            let tol = if p["backend"] == "analytic" { 1e-12 } else { 1e-2 };
            assert!((v - 0.5).abs() < tol, "{p}");
        }
    }
    assert!(!rec["deviations"].as_array().unwrap().is_empty());
    assert_eq!(rec["lattice"]["sites_per_axis"], 48);
    assert!(rec["tolerances"]["lattice_probability"].is_number());
    assert!(rec["threshold_note"].as_str().unwrap().contains("epsilon"));

    // the echoed configuration reproduces the run parameters exactly
    let echo = rec["config"].as_str().unwrap();
    let back = RunConfig::parse(echo).unwrap();
    assert_eq!(back.to_text(), echo);
    assert_eq!(back.scenario, RunConfig::parse(AXES).unwrap().scenario);

    let rows = csv_rows(&out.join("densities.csv"));
    assert!(rows.iter().any(|r| r[0] == "C"));
    let total: f64 = rows.iter().filter(|r| r[0] == "O1" && r[1] == "1").map(|r| r[5].parse::<f64>().unwrap()).sum();
    assert!((total - 0.5).abs() < 1e-2);
}

#[test]
fn analytic_backend_has_no_deviation_block() {
    let o = lab(&["run-eprb", "--backend", "analytic", "--quiet"]);
    assert_eq!(o.status.code(), Some(0));
    let rec: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(rec["deviations"].as_array().unwrap().is_empty());
    assert_eq!(rec["backends"], serde_json::json!(["analytic"]));
}

#[test]
fn config_errors_exit_two_with_key_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = write(dir.path(), "m.toml", "scenario.axes.n1.theta = 0.0\nscenario.axes.n1.phi = 0.0\n");
    let o = lab(&["run-eprb", "--config", &missing]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("scenario.axes.n2.theta"), "{}", stderr(&o));

    let unknown = write(dir.path(), "u.toml", &format!("{AXES}scenario.betta = 0.2\n"));
    let o = lab(&["run-eprb", "--config", &unknown]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("scenario.betta"));

    // comparator already inside its aperture of O2's path: S4 audit
    let early = write(dir.path(), "e.toml", &format!("{AXES}entity.c.center = [-60.0, 0.0, 0.0]\n"));
    let o = lab(&["run-eprb", "--config", &early]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("S4"), "{}", stderr(&o));

    let o = Command::new(env!("CARGO_BIN_EXE_everett-lab"))
        .args(["tail", "--quiet"])
        .env("EVERETT_LAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scan_rows_follow_cosine_law_and_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", AXES);
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = Command::new(env!("CARGO_BIN_EXE_everett-lab"))
            .args(["scan", "--config", &cfg, "--out", out.to_str().unwrap(), "--quiet"])
            .env("EVERETT_LAB_THREADS", "2")
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        std::fs::read_to_string(out.join("scan.csv")).unwrap()
    };
    let a = run("a");
    assert_eq!(a, run("b"));
    let rows = csv_rows(&dir.path().join("a/scan.csv"));
    assert_eq!(rows.len(), 26);
    for r in &rows {
        let theta: f64 = r[0].parse().unwrap();
        let norm: f64 = r[2].parse().unwrap();
        let tol = if r[3] == "analytic" { 1e-6 } else { 1e-2 };
        assert!((norm - 0.5 * (1.0 - theta.cos())).abs() < tol, "{r:?}");
        // 17 significant digits
        assert_eq!(r[1].split('e').next().unwrap().len(), 18);
    }
    let last = rows.iter().rev().find(|r| r[3] == "analytic").unwrap();
    assert!((last[2].parse::<f64>().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn dh_check_single_and_eprb() {
    let dir = tempfile::tempdir().unwrap();
    let single = write(dir.path(), "single.toml", "dh.scenario = \"single_observer\"\n");
    let out = dir.path().join("single");
    let o = lab(&["dh-check", "--config", &single, "--seed", "5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(out.join("dh_check.json")).unwrap()).unwrap();
    assert_eq!(rep["seeds"], serde_json::json!([5, 6, 7]));
    assert_eq!(rep["generator_method"], "sparse probe");
    for v in rep["vacuum_infidelity"].as_array().unwrap() {
        assert!(v.as_f64().unwrap() <= 1e-9);
    }
    let o = lab(&["dh-check", "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let two = write(dir.path(), "two.toml", "dh.scenario = \"single_observer\"\ndh.sites = 2\n");
    let o = lab(&["dh-check", "--config", &two]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("generators (dense)"));
}

#[test]
fn tail_reports_decay_slope() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t");
    let o = lab(&["tail", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = csv_rows(&out.join("tail.csv"));
    let vals: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[1] < w[0]));
    let slope: f64 = rows[0][3].parse().unwrap();
    assert!((slope + 0.5).abs() <= 0.05, "{slope}");

    let dir2 = tempfile::tempdir().unwrap();
    let cfg = write(dir2.path(), "g.toml", "tail.grid = [4.0]\n");
    assert_eq!(lab(&["tail", "--config", &cfg]).status.code(), Some(2));
}
