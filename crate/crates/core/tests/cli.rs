//! End-to-end tests of the `tumordde` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tumordde::cli::RunConfig;

fn tumordde(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tumordde")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.push("--json");
    let o = tumordde(&all);
    (o.status.code().unwrap(), serde_json::from_str(&stdout(&o)).expect("json output"))
}

#[test]
fn analyze_without_lags_reports_stability() {
    let o = tumordde(&["analyze", "--tau1", "0", "--tau2", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("L0 locally asymptotically stable"), "{text}");
    let (_, v) = json(&["analyze", "--tau1", "0", "--tau2", "0"]);
    let roots = v["result"]["undelayed_roots"].as_array().unwrap();
    assert_eq!(roots.len(), 2);
    // both roots of lambda^2 + (b3 - b1 x0) lambda + (a1 b1 - a2 b2) x0 lie in the left half plane
    for r in roots {
        assert!(r[0].as_f64().unwrap() < 0.0);
    }
}

#[test]
fn inadmissible_parameters_exit_with_validation_status() {
    let o = tumordde(&["analyze", "--b4", "3.0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("b4/b3 < a1/a2"), "{}", stderr(&o));
    let (code, v) = json(&["hopf", "--b2", "2.5"]);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "validation");
    assert!(v["error"]["message"].as_str().unwrap().contains("b2/b1 < b4/b3"));
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[model]\na1 = 2.5\nbogus = 1\n").unwrap();
    let o = tumordde(&["analyze", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bogus"), "{}", stderr(&o));

    let path = dir.path().join("neg.toml");
    std::fs::write(&path, "[run]\ndt = -1.0\n").unwrap();
    let o = tumordde(&["simulate", "--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("dt"), "{}", stderr(&o));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let o = tumordde(&["analyze", "--config", "/nonexistent/run.toml"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn unwritable_output_directory_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = blocker.join("sub");
    let o = tumordde(&["simulate", "--t-end", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("sub"));
}

#[test]
fn hopf_lists_certified_points() {
    let (code, v) = json(&["hopf", "--tau2", "0.01"]);
    assert_eq!(code, 0);
    let pts = v["result"]["points"].as_array().unwrap();
    assert!(!pts.is_empty());
    assert!((pts[0]["tau_crit"].as_f64().unwrap() - 1.98558423).abs() < 1e-7);
    for p in pts {
        assert!(p["residual"].as_f64().unwrap() < 1e-9);
    }
    assert!(v["result"]["no_crossing"].is_null());

    let (code, v) = json(&["hopf", "--q2", "0.1"]);
    assert_eq!(code, 0);
    let p = &v["result"]["points"][0];
    assert!((p["omega"].as_f64().unwrap() - 0.39681665).abs() < 1e-7);
    for b in p["balance"].as_array().unwrap() {
        assert!(b.as_f64().unwrap().abs() < 1e-9);
    }
}

#[test]
fn normalform_verdict_is_one_of_the_eight() {
    for args in [["normalform", "--tau2", "0.01"], ["normalform", "--q2", "0.1"]] {
        let (code, v) = json(&args);
        assert_eq!(code, 0);
        let verdict = v["result"]["verdict"].as_str().unwrap().to_string();
        let parts: Vec<&str> = verdict.split(", ").collect();
        assert_eq!(parts.len(), 3);
        assert!(["supercritical", "subcritical"].contains(&parts[0]));
        assert!(["orbitally stable", "orbitally unstable"].contains(&parts[1]));
        assert!(["period increases", "period decreases"].contains(&parts[2]));
        assert!(v["result"]["diagnostics"]["pairing_error"].as_f64().unwrap() < 1e-10);
    }
}

#[test]
fn zeroed_nonlinearity_gives_zero_quantities() {
    let (code, v) = json(&["normalform", "--tau2", "0.01", "--zero-nonlinear"]);
    assert_eq!(code, 0);
    let r = &v["result"]["result"];
    for key in ["g20", "g11", "g02", "g21", "c1"] {
        for part in r[key].as_array().unwrap() {
            assert_eq!(part.as_f64().unwrap(), 0.0, "{key}");
        }
    }
    for key in ["mu2", "beta2", "t2"] {
        assert_eq!(r[key].as_f64().unwrap().abs(), 0.0, "{key}");
    }
}

fn csv_lines(dir: &Path) -> Vec<String> {
    std::fs::read_to_string(dir.join("trajectory.csv")).unwrap().lines().map(String::from).collect()
}

#[test]
fn simulate_writes_csv_and_svg_with_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = tumordde(&["simulate", "--tau1", "1.5", "--t-end", "30", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let lines = csv_lines(dir.path());
    let header = lines.iter().position(|l| !l.starts_with('#')).unwrap();
    assert_eq!(lines[header], "t,x,y");
    assert!(lines[..header].iter().any(|l| l.contains("\"a1\":2.5")));
    assert!(lines[..header].iter().any(|l| l.contains(tumordde::VERSION)));
    let first: Vec<&str> = lines[header + 1].split(',').collect();
    assert_eq!(first.len(), 3);
    // 15 significant digits
    assert!(first[1].contains('e') && first[1].split('e').next().unwrap().replace(['-', '.'], "").len() == 15);
    let last: Vec<f64> = lines.last().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert!((last[0] - 30.0).abs() < 1e-9);
    for f in ["waveform_x.svg", "waveform_y.svg", "phase.svg"] {
        let svg = std::fs::read_to_string(dir.path().join(f)).unwrap();
        assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
        assert!(svg.contains("<metadata>") && svg.contains("polyline"));
    }

    let dir2 = tempfile::tempdir().unwrap();
    let o = tumordde(&["simulate", "--tau1", "1.5", "--q2", "0.1", "--t-end", "30", "--out", dir2.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let lines = csv_lines(dir2.path());
    assert!(lines.iter().any(|l| l == "t,x,y,z"));
}

#[test]
fn simulate_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = tumordde(&["simulate", "--tau1", "2.2", "--q2", "0.1", "--t-end", "60", "--out", d.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    for f in ["trajectory.csv", "waveform_x.svg", "waveform_y.svg", "phase.svg"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn json_output_round_trips_through_the_config_parser() {
    let dir = tempfile::tempdir().unwrap();
    let (_, v) = json(&["analyze", "--a1", "2.7", "--tau1", "0.3", "--q2", "0.25", "--dt", "0.002"]);
    let envelope = dir.path().join("run.json");
    std::fs::write(&envelope, v.to_string()).unwrap();
    let cfg = RunConfig::from_path(&envelope).unwrap();
    assert_eq!(serde_json::to_value(&cfg).unwrap(), v["config"]);
    assert_eq!(cfg.model.a1, 2.7);
    assert_eq!(cfg.run.dt, 0.002);

    // the parsed config reproduces the same output when fed back in
    let (_, again) = json(&["analyze", "--config", envelope.to_str().unwrap()]);
    assert_eq!(again, v);

    // TOML export of the same config reads back identically
    let toml_path = dir.path().join("run.toml");
    std::fs::write(&toml_path, cfg.to_toml_string()).unwrap();
    assert_eq!(RunConfig::from_path(&toml_path).unwrap(), cfg);
}

#[test]
fn flags_override_file_values() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "[kernels]\nkernel1 = { type = \"dirac\", tau = 1.0 }\nkernel2 = { type = \"dirac\", tau = 0.2 }\n").unwrap();
    let (_, v) = json(&["analyze", "--config", path.to_str().unwrap(), "--tau2", "0.01"]);
    assert_eq!(v["config"]["kernels"]["kernel1"]["tau"], 1.0);
    assert_eq!(v["config"]["kernels"]["kernel2"]["tau"], 0.01);
}

#[test]
fn reproduce_paper_covers_every_printed_quantity() {
    let dir = tempfile::tempdir().unwrap();
    let o = tumordde(&["reproduce-paper", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("discrepancy_report.json")).unwrap()).unwrap();
    let rows = report["rows"].as_array().unwrap();
    let mut names: Vec<&str> = rows.iter().map(|r| r["quantity"].as_str().unwrap()).collect();
    names.sort_unstable();
    names.dedup();
    assert_eq!(names.len(), 13);
    let x0 = rows.iter().find(|r| r["quantity"] == "x0").unwrap();
    assert_eq!(x0["classification"], "mismatch");
    assert_eq!(x0["printed"].as_f64().unwrap(), 0.1524390244);
    for r in rows.iter().filter(|r| !r["artifact"].is_null()) {
        assert!(r["residual"].as_f64().unwrap() < 1e-8, "{r}");
    }
    assert!(stdout(&o).contains("x0"));
}
