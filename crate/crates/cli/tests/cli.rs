use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn weylstrip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weylstrip")).args(args).output().expect("binary runs")
}

fn write_config(dir: &TempDir, name: &str, cfg: &Value) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path.display().to_string()
}

fn run_json(mode: &str, cfg: &Value, extra: &[&str]) -> Value {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, "scenario.json", cfg);
    let mut args = vec![mode, "--config", &path];
    args.extend_from_slice(extra);
    let out = weylstrip(&args);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn phi00(rec: &Value) -> (f64, f64) {
    let e = &rec["phi"][0][0];
    (e[0].as_f64().unwrap(), e[1].as_f64().unwrap())
}

fn plane_wave(q: f64, k: f64) -> Value {
    json!({"kind": "plane_wave", "amplitude": [[[q, 0.0]]], "wavenumber": k})
}

#[test]
fn weyl_zero_potential() {
    let cfg = json!({"sig": {"m1": 1, "m2": 1}, "potential": {"kind": "zero"}, "z_list": [[0.0, 1.0]], "grids": {"x_max": 10.0}});
    let rep = run_json("weyl", &cfg, &[]);
    let rec = &rep["records"][0];
    assert_eq!(phi00(rec), (0.0, 0.0));
    let unc = rec["uncertainty"].as_f64().unwrap();
    assert!((unc / (-20.0f64).exp() - 1.0).abs() < 1e-6, "{unc}");
    assert_eq!(rec["flags"]["non_expansive"], true);
    assert!(rep["timestamp"].is_u64());
}

#[test]
fn evolve_plane_wave_matches_direct() {
    let cfg = json!({
        "sig": {"m1": 1, "m2": 1},
        "potential": plane_wave(0.3, 1.0),
        "z_list": [[0.2, 1.0]],
        "grids": {"x_max": 12.0, "t_max": 0.5, "steps": 1},
        "tolerances": {"ode_tol": 1e-10, "accept_tol": 1e-4}
    });
    let rep = run_json("evolve", &cfg, &[]);
    let rec = &rep["records"][0];
    assert_eq!(rec["coord"].as_f64().unwrap(), 0.5);
    assert!(rec["residual"].as_f64().unwrap() <= 1e-4);
    assert_eq!(rec["flags"]["within_tol"], true);
    assert_eq!(rec["flags"]["in_omega_hat_t"], true);
}

#[test]
fn recover_plane_wave_jet() {
    let cfg = json!({
        "sig": {"m1": 1, "m2": 1},
        "boundary": plane_wave(0.3, 1.0),
        "grids": {"t_max": 1.0, "degree": 40, "jet_order": 8},
        "tolerances": {"accept_tol": 1e-7}
    });
    let rep = run_json("recover", &cfg, &[]);
    let recs = rep["records"].as_array().unwrap();
    assert_eq!(recs.len(), 9);
    for (k, rec) in recs.iter().enumerate() {
        let dev = rec["residual"].as_f64().unwrap();
        let bound = if k <= 6 { 1e-8 } else { 1e-7 };
        assert!(dev <= bound, "k = {k}: {dev}");
        assert!(rec["z"].is_null());
    }
    assert!(rep["summary"]["values"]["recursion_residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn recover_from_sample_file() {
    let dir = TempDir::new().unwrap();
    let (q, k) = (0.25f64, 0.8f64);
    let w = (k * k + 2.0 * q * q) / 2.0;
    let mut text = String::from("t,v_0_0_re,v_0_0_im,vx_0_0_re,vx_0_0_im\n");
    for i in 0..=300 {
        let t = i as f64 / 100.0;
        let (c, s) = ((w * t).cos(), (-w * t).sin());
        text.push_str(&format!("{t:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n", q * c, q * s, -k * q * s, k * q * c));
    }
    std::fs::write(dir.path().join("trace.csv"), text).unwrap();
    let cfg = json!({
        "sig": {"m1": 1, "m2": 1},
        "boundary": {"kind": "csv", "path": "trace.csv"},
        "grids": {"t_max": 3.0, "degree": 30, "jet_order": 4}
    });
    let path = write_config(&dir, "scenario.json", &cfg);
    let out = weylstrip(&["recover", "--config", &path]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep: Value = serde_json::from_slice(&out.stdout).unwrap();
    // w_2(0) = -k² q
    let (re, im) = phi00(&rep["records"][2]);
    assert!((re + k * k * q).abs() < 1e-8 && im.abs() < 1e-8, "{re} {im}");
}

#[test]
fn quarterplane_against_direct_estimate() {
    let cfg = json!({
        "sig": {"m1": 1, "m2": 1},
        "boundary": plane_wave(0.2, 1.0),
        "potential": plane_wave(0.2, 1.0),
        "z_list": [[-1.0, 1.0], [0.5, 1.0]],
        "grids": {"t_max": 20.0, "degree": 60, "x_max": 12.0},
        "tolerances": {"ode_tol": 1e-10, "accept_tol": 1e-3}
    });
    let rep = run_json("quarterplane", &cfg, &[]);
    let inside = &rep["records"][0];
    assert_eq!(inside["flags"]["in_omega"], true);
    assert_eq!(inside["flags"]["within_tol"], true);
    assert_eq!(inside["flags"]["r22_at_least_one"], true);
    let outside = &rep["records"][1];
    assert_eq!(outside["flags"]["in_omega"], false);
    assert!(outside["phi"].is_null());
}

#[test]
fn verify_plane_wave_and_perturbation() {
    let mut cfg = json!({
        "sig": {"m1": 1, "m2": 1},
        "potential": plane_wave(0.3, 1.0),
        "z_list": [[0.5, 0.5], [0.7, 0.0]],
        "grids": {"x": 1.0, "t_max": 0.5, "h": 0.01},
        "tolerances": {"ode_tol": 1e-9, "accept_tol": 1e-6}
    });
    let rep = run_json("verify", &cfg, &[]);
    for rec in rep["records"].as_array().unwrap() {
        assert_eq!(rec["flags"]["within_tol"], true);
        assert!(rec["values"]["zero_curvature_residual"].as_f64().unwrap() < 1e-3);
    }
    assert!(rep["summary"]["values"]["dnls_residual"].as_f64().unwrap() < 1e-4);
    cfg["potential"]["frequency_shift"] = json!(0.1);
    let bad = run_json("verify", &cfg, &[]);
    assert!(bad["summary"]["values"]["dnls_residual"].as_f64().unwrap() > 0.05 * 0.3);
    assert_eq!(bad["records"][0]["flags"]["within_tol"], false);
}

#[test]
fn empty_z_list_csv_is_header_only() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({"sig": {"m1": 2, "m2": 1}, "potential": {"kind": "zero"}, "z_list": []});
    let path = write_config(&dir, "s.json", &cfg);
    let out_path = dir.path().join("report.csv");
    let out = weylstrip(&["weyl", "--config", &path, "--format", "csv", "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(out_path).unwrap();
    assert_eq!(text, "z_re,z_im,coord,phi_0_0_re,phi_0_0_im,phi_0_1_re,phi_0_1_im,uncertainty,residual,flags\n");
}

#[test]
fn csv_row_matches_json_bit_for_bit() {
    let cfg = json!({"sig": {"m1": 1, "m2": 1}, "potential": {"kind": "constant", "value": [[[1.0, 0.0]]]}, "z_list": [[0.0, 0.75]]});
    let rep = run_json("weyl", &cfg, &[]);
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, "s.json", &cfg);
    let out = weylstrip(&["weyl", "--config", &path, "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let row: Vec<&str> = lines[1].split(',').collect();
    let (re, im) = phi00(&rep["records"][0]);
    assert_eq!(row[3].parse::<f64>().unwrap(), re);
    assert_eq!(row[4].parse::<f64>().unwrap(), im);
    assert_eq!(row[5].parse::<f64>().unwrap(), rep["records"][0]["uncertainty"].as_f64().unwrap());
    assert!((im - 0.5).abs() < 1e-6 && re.abs() < 1e-6);
}

#[test]
fn rerun_with_echoed_config_is_identical() {
    let cfg = json!({
        "sig": {"m1": 2, "m2": 1},
        "potential": {"kind": "plane_wave", "amplitude": [[[0.3, 0.0]], [[0.0, 0.4]]], "wavenumber": -0.5},
        "z_list": [[0.1, 1.0], [-0.4, 0.6], [1.0, 2.0]],
        "grids": {"x_max": 15.0}
    });
    let first = run_json("weyl", &cfg, &["--workers", "3"]);
    let second = run_json("weyl", &first["config"], &["--workers", "1"]);
    for key in ["mode", "config", "phi_shape", "records", "summary"] {
        assert_eq!(first[key], second[key], "{key}");
    }
    let zs: Vec<f64> = first["records"].as_array().unwrap().iter().map(|r| r["z"][0].as_f64().unwrap()).collect();
    assert_eq!(zs, vec![0.1, -0.4, 1.0]);
}

#[test]
fn schema_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = write_config(&dir, "bad.json", &json!({"sig": {"m1": 1, "m2": 1}, "potential": {"kind": "zero"}, "z_list": [[0.0, -1.0]]}));
    assert_eq!(weylstrip(&["weyl", "--config", &bad]).status.code(), Some(2));
    let unknown = write_config(&dir, "unknown.json", &json!({"sig": {"m1": 1, "m2": 1}, "colour": "red"}));
    assert_eq!(weylstrip(&["weyl", "--config", &unknown]).status.code(), Some(2));
    let mismatch = write_config(&dir, "mode.json", &json!({"mode": "evolve", "sig": {"m1": 1, "m2": 1}, "potential": {"kind": "zero"}}));
    assert_eq!(weylstrip(&["weyl", "--config", &mismatch]).status.code(), Some(2));
    assert_eq!(weylstrip(&["weyl", "--config", "/nonexistent/x.json"]).status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3_and_names_stage() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "sig": {"m1": 1, "m2": 1},
        "potential": {"kind": "sampled", "grid": [0.0, 1.0, 2.0], "values": [[[[0.1, 0.0]]], [[[0.2, 0.0]]], [[[0.1, 0.0]]]]},
        "z_list": [[0.0, 1.0]],
        "grids": {"x_max": 5.0}
    });
    let path = write_config(&dir, "s.json", &cfg);
    let out = weylstrip(&["weyl", "--config", &path]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("weyl_estimate"));
}

#[test]
fn unwritable_output_reports_path() {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, "s.json", &json!({"sig": {"m1": 1, "m2": 1}, "potential": {"kind": "zero"}, "z_list": [[0.0, 1.0]]}));
    let target = Path::new("/nonexistent-dir/report.json");
    let out = weylstrip(&["weyl", "--config", &path, "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent-dir/report.json"));
}
