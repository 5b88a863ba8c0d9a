use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn isocap(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isocap"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn shape_file(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn bounds_on_the_unit_ball_are_equalities() {
    let tmp = TempDir::new().unwrap();
    shape_file(tmp.path(), "ball.json", r#"{"kind": "ball", "dim": 3, "radius": 1.0}"#);
    let o = isocap(tmp.path(), &["bounds", "ball.json", "--out", "run"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&tmp.path().join("run/report.json"));
    for name in ["perimeter_integral", "mean_curvature", "p2_over_v"] {
        let s = report["slack"][name].as_f64().unwrap();
        assert!((s - 1.0).abs() < 1e-6, "{name}: {s}");
    }
    let csv = std::fs::read_to_string(tmp.path().join("run/report.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    for col in ["method", "stderr", "seed"] {
        assert!(header.split(',').any(|h| h == col), "{header}");
    }
    let m = read_json(&tmp.path().join("run/manifest.json"));
    assert_eq!(m["command"], "bounds");
    assert_eq!(m["seed"], 42);
    assert_eq!(m["shape_files"][0], "ball.json");
    assert!(m["timestamp"].is_string() && m["version"].is_string());
}

#[test]
fn bounds_on_an_ellipsoid_dominate_the_reference() {
    let tmp = TempDir::new().unwrap();
    shape_file(tmp.path(), "e.json", r#"{"kind": "ellipsoid", "dim": 3, "semi_axes": [2.0, 1.0, 1.0]}"#);
    let o = isocap(tmp.path(), &["bounds", "e.json", "--cd", "0.1", "--samples", "50000"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&tmp.path().join("report.json"));
    let reference = report["reference"]["value"].as_f64().unwrap();
    assert!((reference - 16.527).abs() < 1e-3);
    let bounds = report["bounds"].as_object().unwrap();
    assert!(bounds.contains_key("fraenkel_refined"));
    for (name, b) in bounds {
        assert!(b["value"].as_f64().unwrap() > reference, "{name}");
    }
    assert_eq!(read_json(&tmp.path().join("manifest.json"))["c_d"], 0.1);
}

#[test]
fn bounds_on_the_segment_family() {
    let tmp = TempDir::new().unwrap();
    shape_file(tmp.path(), "k.json", r#"{"kind": "segment_family", "alpha": 1.0, "truncation": 200}"#);
    let o = isocap(tmp.path(), &["bounds", "k.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&tmp.path().join("report.json"));
    assert_eq!(report["reference"]["method"], "analytic_zero");
    assert!(report["bounds"]["perimeter_integral"]["value"].as_f64().unwrap() >= 2.0 * PI / 7.0);
}

#[test]
fn bad_input_exits_with_one() {
    let tmp = TempDir::new().unwrap();
    shape_file(tmp.path(), "bad.json", r#"{"kind": "ball", "dim": 3, "radius": -1.0}"#);
    shape_file(tmp.path(), "junk.json", "not json");
    shape_file(tmp.path(), "disc.json", r#"{"kind": "ball", "dim": 2, "radius": 1.0}"#);
    assert_eq!(code(&isocap(tmp.path(), &["bounds", "bad.json"])), 1);
    assert_eq!(code(&isocap(tmp.path(), &["bounds", "junk.json"])), 1);
    assert_eq!(code(&isocap(tmp.path(), &["bounds", "missing.json"])), 1);
    assert_eq!(code(&isocap(tmp.path(), &["bounds", "disc.json"])), 1);
    assert_eq!(code(&isocap(tmp.path(), &["bounds", "disc.json", "--no-such-flag"])), 1);
    assert_eq!(code(&isocap(tmp.path(), &["verify", "nope"])), 1);
    assert_eq!(code(&isocap(tmp.path(), &["--workers", "0", "verify", "af"])), 1);
}

#[test]
fn single_shape_commands_print_json() {
    let tmp = TempDir::new().unwrap();
    shape_file(tmp.path(), "ball.json", r#"{"kind": "ball", "dim": 3, "radius": 1.0}"#);
    shape_file(tmp.path(), "cube.json", r#"{"kind": "box", "dim": 3, "half_widths": [0.5, 0.5, 0.5]}"#);

    let o = isocap(tmp.path(), &["capacity", "ball.json"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert!((v["result"]["value"].as_f64().unwrap() - 4.0 * PI).abs() < 1e-12);
    assert_eq!(v["result"]["method"], "exact");

    let o = isocap(tmp.path(), &["--seed", "5", "capacity", "cube.json", "--samples", "20000"]);
    let v = stdout_json(&o);
    assert_eq!(v["manifest"]["seed"], 5);
    let c = v["result"]["value"].as_f64().unwrap();
    assert!(c > 2.0 * PI && c < 4.0 * PI * 3f64.sqrt() / 2.0);

    let v = stdout_json(&isocap(tmp.path(), &["torsion", "ball.json"]));
    assert!((v["result"]["value"].as_f64().unwrap() - 4.0 * PI / 45.0).abs() < 1e-12);

    let v = stdout_json(&isocap(tmp.path(), &["functional", "ball.json", "--kind", "g"]));
    assert!((v["result"]["value"].as_f64().unwrap() - 0.2).abs() < 1e-12);
    let v = stdout_json(&isocap(tmp.path(), &["functional", "ball.json", "--kind", "j_alpha", "--alpha", "1"]));
    assert!((v["result"]["value"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);

    let v = stdout_json(&isocap(tmp.path(), &["asymmetry", "ball.json"]));
    assert_eq!(v["result"]["value"].as_f64().unwrap(), 0.0);
}

#[test]
fn verify_suites() {
    let tmp = TempDir::new().unwrap();
    let o = isocap(tmp.path(), &["verify", "ball-equalities"]);
    assert_eq!(code(&o), 0);
    let r = read_json(&tmp.path().join("verify_ball-equalities.json"));
    assert_eq!(r["pass"], true);
    for c in r["checks"].as_array().unwrap() {
        let (v, reference) = (c["value"].as_f64().unwrap(), c["reference"].as_f64().unwrap());
        assert!((v / reference - 1.0).abs() < 1e-6);
    }
    assert_eq!(code(&isocap(tmp.path(), &["verify", "theorem3", "--alpha", "0.5"])), 0);
    assert_eq!(code(&isocap(tmp.path(), &["verify", "dominance", "--seed", "42", "--samples", "20000"])), 0);
}

#[test]
fn sausage_precondition_and_d3_example() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&isocap(tmp.path(), &["sausage", "--d", "4", "--check-bounds"])), 1);
    assert_eq!(code(&isocap(tmp.path(), &["sausage", "--d", "5", "--dt", "1"])), 1);
    let o = isocap(
        tmp.path(),
        &["sausage", "--d", "3", "--eps", "1", "--t-max", "50", "--paths", "100", "--dt", "0.01", "--seed", "3"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = read_json(&tmp.path().join("sausage_summary.json"));
    let slope = s["slope"]["slope"].as_f64().unwrap();
    assert!((slope / (4.0 * PI) - 1.0).abs() < 0.1, "{slope}");
    let means = std::fs::read_to_string(tmp.path().join("sausage_means.csv")).unwrap();
    assert_eq!(means.lines().next().unwrap(), "t,mean_volume,stderr,method,seed");
    assert_eq!(means.lines().count(), 6);
}

#[test]
fn sausage_d5_example_checks_bounds() {
    let tmp = TempDir::new().unwrap();
    let o = isocap(
        tmp.path(),
        &["sausage", "--d", "5", "--eps", "0.5", "--t-max", "20", "--paths", "200", "--dt", "1e-3", "--seed", "7", "--check-bounds"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = read_json(&tmp.path().join("sausage_summary.json"));
    let slope = s["slope"]["slope"].as_f64().unwrap();
    assert!((slope / (PI * PI) - 1.0).abs() < 0.1, "{slope}");
    assert_eq!(s["bounds"]["pass"], true);
}

#[test]
fn outputs_are_reproducible_across_worker_counts() {
    let tmp = TempDir::new().unwrap();
    let args = |out: &str, workers: &str| {
        vec!["--workers".to_string(), workers.into(), "--out".into(), out.into(), "sausage".into(), "--d".into(), "5".into(), "--t-max".into(), "2".into(), "--paths".into(), "12".into()]
    };
    for (out, w) in [("a", "1"), ("b", "3")] {
        let a: Vec<String> = args(out, w);
        let refs: Vec<&str> = a.iter().map(String::as_str).collect();
        assert_eq!(code(&isocap(tmp.path(), &refs)), 0);
    }
    for f in ["sausage_means.csv", "sausage_paths.csv"] {
        assert_eq!(std::fs::read(tmp.path().join("a").join(f)).unwrap(), std::fs::read(tmp.path().join("b").join(f)).unwrap());
    }
}

#[test]
fn config_file_supplies_defaults() {
    let tmp = TempDir::new().unwrap();
    shape_file(tmp.path(), "cube.json", r#"{"kind": "box", "dim": 3, "half_widths": [0.5, 0.5, 0.5]}"#);
    std::fs::write(tmp.path().join("isocap.conf"), "seed = 9\nsamples = 5000\n").unwrap();
    let v = stdout_json(&isocap(tmp.path(), &["--config", "isocap.conf", "capacity", "cube.json"]));
    assert_eq!(v["manifest"]["seed"], 9);
    assert_eq!(v["manifest"]["samples"], 5000);
    let v = stdout_json(&isocap(tmp.path(), &["--config", "isocap.conf", "--seed", "10", "capacity", "cube.json"]));
    assert_eq!(v["manifest"]["seed"], 10);
    std::fs::write(tmp.path().join("bad.conf"), "sede = 1\n").unwrap();
    assert_eq!(code(&isocap(tmp.path(), &["--config", "bad.conf", "capacity", "cube.json"])), 1);
}
