//! End-to-end tests of the `fde-lab` binary: exit codes, output files,
//! determinism, and the sweep aggregator.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_fde-lab")
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fde-lab-test-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

#[test]
fn list_names_every_experiment() {
    let out = run(&["list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "heat-gap",
        "lane-emden",
        "separable",
        "extinction-bounds",
        "entropy-rate",
        "pme-rate",
        "barrier",
        "poincare-suite",
        "inequality-suite",
    ] {
        assert!(text.contains(name), "list output missing {name}");
    }
    // every line cites at least one theorem anchor
    for line in text.lines() {
        assert!(line.contains("anchors:"), "line without anchors: {line}");
    }
}

#[test]
fn missing_config_exits_2() {
    let out = run(&["run", "--config", "/nonexistent/cfg.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_key_exits_2_and_writes_nothing() {
    let dir = tmp_dir("badkey");
    let cfg = write_config(&dir, "cfg.json", r#"{"experiment":"separable","bogus":1}"#);
    let out_dir = dir.join("out");
    let out = run(&["run", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_dir.exists(), "no outputs may be written on config errors");
}

#[test]
fn invalid_value_exits_2() {
    let dir = tmp_dir("badval");
    let cfg = write_config(&dir, "cfg.json", r#"{"experiment":"separable","m":-0.5}"#);
    let out = run(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn passing_run_exits_0_with_report_and_traces() {
    let dir = tmp_dir("separable");
    let cfg = write_config(&dir, "cfg.json", r#"{"experiment":"separable"}"#);
    let out_dir = dir.join("out");
    let out = run(&["run", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["schema"], 1);
    assert_eq!(report["experiment"], "separable");
    assert_eq!(report["pass"], true);
    let checks = report["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    for c in checks {
        assert!(c["anchor"].as_str().is_some_and(|a| !a.is_empty()));
        assert_eq!(c["pass"], true);
    }
    assert!(out_dir.join("meta.json").exists());
    let traces: Vec<_> = std::fs::read_dir(&out_dir)
        .unwrap()
        .filter_map(|e| {
            let name = e.unwrap().file_name().into_string().unwrap();
            (name.starts_with("trace_") && name.ends_with(".csv")).then_some(name)
        })
        .collect();
    assert!(!traces.is_empty(), "expected at least one trace CSV");
}

#[test]
fn failed_check_exits_1_but_still_reports() {
    // a deliberately coarse time step distorts the implicit-Euler decay
    // rate to log(1 + r dt)/dt, outside the 10% tolerance
    let dir = tmp_dir("pme-coarse");
    let cfg = write_config(
        &dir,
        "cfg.json",
        r#"{"experiment":"pme-rate","dt0":0.3,"store_every":1,"max_steps":200}"#,
    );
    let out_dir = dir.join("out");
    let out = run(&["run", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["pass"], false);
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = tmp_dir("determinism");
    let cfg = write_config(&dir, "cfg.json", r#"{"experiment":"inequality-suite","seed":7}"#);
    let (a, b) = (dir.join("a"), dir.join("b"));
    for out_dir in [&a, &b] {
        let out =
            run(&["run", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    for entry in std::fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        if name == "meta.json" {
            continue; // wall time is the one non-deterministic output
        }
        let fa = std::fs::read(a.join(&name)).unwrap();
        let fb = std::fs::read(b.join(&name)).unwrap();
        assert_eq!(fa, fb, "{name:?} differs between identical seeded runs");
    }
}

#[test]
fn sweep_writes_ordered_aggregate() {
    let dir = tmp_dir("sweep");
    let cfg = write_config(&dir, "cfg.json", r#"{"experiment":"separable"}"#);
    let out_dir = dir.join("out");
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--key",
        "c",
        "--values",
        "2.0,4.0",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("c,"));
    assert!(header.ends_with(",pass"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    // rows ordered by input value, not completion order
    assert!(rows[0].starts_with("2.0"));
    assert!(rows[1].starts_with("4.0"));
    assert!(out_dir.join("c-2.0").join("report.json").exists());
    assert!(out_dir.join("c-4.0").join("report.json").exists());
}

#[test]
fn sweep_empty_values_exits_2() {
    let dir = tmp_dir("sweep-empty");
    let cfg = write_config(&dir, "cfg.json", r#"{"experiment":"separable"}"#);
    let out = run(&["sweep", "--config", cfg.to_str().unwrap(), "--key", "c", "--values", ""]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_bad_key_exits_2() {
    let dir = tmp_dir("sweep-badkey");
    let cfg = write_config(&dir, "cfg.json", r#"{"experiment":"separable"}"#);
    let out =
        run(&["sweep", "--config", cfg.to_str().unwrap(), "--key", "nope", "--values", "1,2"]);
    assert_eq!(out.status.code(), Some(2));
}
