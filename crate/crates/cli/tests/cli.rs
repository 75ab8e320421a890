use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use smectic::analytic::{bps_edge_u, screw_gamma, EdgeSolutionParams};

fn smectic(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smectic"))
        .args(args)
        .arg("--output-dir")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, v: &Value) -> String {
    let p = dir.join("scenario.json");
    fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p.to_str().unwrap().to_string()
}

fn csv_column(path: &Path, col: usize) -> Vec<(Vec<f64>, bool)> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            let nums = cols[..col + 1].iter().map(|c| c.parse::<f64>().unwrap()).collect();
            (nums, cols.last() == Some(&"1"))
        })
        .collect()
}

fn bps_scenario() -> Value {
    json!({
        "version": 1,
        "grid": { "origin": [-4.0, 0.0, 0.5], "extents": [33, 4, 17], "spacing": [0.25, 0.25, 0.25] },
        "defects": [{ "kind": "edge", "n": -4, "anchor": [0.0, 0.0, 0.0], "direction": [0.0, 1.0, 0.0] }],
        "solution": "bps-edge",
        "outputs": [
            { "field": "u", "format": "csv", "path": "u.csv" },
            { "field": "gamma", "format": "vtk", "path": "out/gamma.vtk" },
            { "field": "energy", "format": "json", "path": "energy.json" }
        ]
    })
}

#[test]
fn bps_edge_export_matches_analytic_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &bps_scenario());
    let out = smectic(&["--quiet", "run", &cfg], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let p = EdgeSolutionParams::new(4.0, 1.0).unwrap();
    let rows = csv_column(&dir.path().join("u.csv"), 3);
    assert_eq!(rows.len(), 33 * 4 * 17);
    for (r, masked) in rows {
        assert!(!masked);
        assert_eq!(r[3], bps_edge_u(r[0], r[2], &p).unwrap());
    }
}

#[test]
fn manifest_lists_every_artifact_and_runs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let cfg = write_config(d.path(), &bps_scenario());
        assert!(smectic(&["--quiet", "run", &cfg], d.path()).status.success());
    }
    let m: Value = serde_json::from_str(&fs::read_to_string(a.path().join("manifest.json")).unwrap()).unwrap();
    let arts = m["artifacts"].as_array().unwrap();
    assert_eq!(arts.len(), 3);
    for art in arts {
        let rel = art["path"].as_str().unwrap();
        let bytes = fs::read(a.path().join(rel)).unwrap();
        assert_eq!(art["bytes"].as_u64().unwrap() as usize, bytes.len());
        assert_eq!(bytes, fs::read(b.path().join(rel)).unwrap());
        assert_eq!(art["sha256"].as_str().unwrap().len(), 64);
    }
    assert_eq!(m["lambda"], 1.0);
    assert_eq!(
        fs::read(a.path().join("manifest.json")).unwrap(),
        fs::read(b.path().join("manifest.json")).unwrap()
    );
}

#[test]
fn flat_layers_have_zero_energy() {
    let dir = tempfile::tempdir().unwrap();
    let v = json!({
        "version": 1,
        "grid": { "origin": [0.0, 0.0, 0.0], "extents": [8, 8, 8], "spacing": [0.125, 0.125, 0.125] },
        "solution": "linear-edge",
        "outputs": [{ "field": "energy", "format": "json", "path": "energy.json" }]
    });
    let cfg = write_config(dir.path(), &v);
    assert!(smectic(&["--quiet", "run", &cfg], dir.path()).status.success());
    let e: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("energy.json")).unwrap()).unwrap();
    assert_eq!(e["nonlinear"]["total"], 0.0);
    assert_eq!(e["linear"], 0.0);
}

#[test]
fn helicoid_gamma_follows_radial_profile() {
    let dir = tempfile::tempdir().unwrap();
    let b = 2.0 * std::f64::consts::PI;
    let v = json!({
        "version": 1,
        "grid": { "origin": [-4.0, -4.0, 0.0], "extents": [65, 65, 5], "spacing": [0.125, 0.125, 0.125] },
        "defects": [{ "kind": "screw", "n": -1, "anchor": [0.0, 0.0, 0.0], "direction": [0.0, 0.0, 1.0] }],
        "material": { "B": 1.0, "K1": 1.0, "a": b, "xi": 0.1, "Ly": 1.0 },
        "solution": "helicoid",
        "outputs": [{ "field": "gamma", "format": "csv", "path": "gamma.csv" }]
    });
    let cfg = write_config(dir.path(), &v);
    let out = smectic(&["--quiet", "run", &cfg], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut worst: f64 = 0.0;
    for (r, masked) in csv_column(&dir.path().join("gamma.csv"), 3) {
        let rad = r[0].hypot(r[1]);
        // Away from the branch cut and the box faces.
        if masked || rad < 2.0 || r[0].abs() > 3.5 || r[1].abs() > 3.5 || r[0] < 0.0 && r[1].abs() < 0.5 {
            continue;
        }
        worst = worst.max((r[3] - screw_gamma(rad, b).unwrap()).abs());
    }
    assert!(worst < 1e-2, "{worst}");
}

#[test]
fn flow_writes_a_stack() {
    let dir = tempfile::tempdir().unwrap();
    let v = json!({
        "version": 1,
        "solution": "flow",
        "flow_options": { "seed": { "type": "circle", "centre": [0.0, 0.0], "radius": 5.0, "n_points": 64 }, "n_layers": 3, "dn": 0.1 },
        "outputs": [
            { "field": "stack", "format": "csv", "path": "stack.csv" },
            { "field": "stack", "format": "vtk", "path": "stack.vtk" }
        ]
    });
    let cfg = write_config(dir.path(), &v);
    let out = smectic(&["--quiet", "run", &cfg], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_column(&dir.path().join("stack.csv"), 2);
    assert_eq!(rows.len(), 4 * 64);
    assert!(fs::read_to_string(dir.path().join("stack.vtk")).unwrap().contains("LINES 4"));
}

#[test]
fn spectral_and_analytic_agree_on_layers() {
    let dir = tempfile::tempdir().unwrap();
    let v = json!({
        "version": 1,
        "grid": { "origin": [-16.0, 0.0, -16.0], "extents": [64, 4, 64], "spacing": [0.5, 0.5, 0.5] },
        "defects": [{ "kind": "edge", "n": 1, "anchor": [0.25, 0.0, 0.25], "direction": [0.0, 1.0, 0.0] }],
        "solution": "spectral",
        "outputs": [
            { "field": "grad-u", "format": "csv", "path": "grad.csv" },
            { "field": "spectrum", "format": "csv", "path": "m.csv" },
            { "field": "energy", "format": "json", "path": "e.json" }
        ]
    });
    let cfg = write_config(dir.path(), &v);
    let out = smectic(&["--quiet", "run", &cfg], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let e: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("e.json")).unwrap()).unwrap();
    assert!(e["spectral"].as_f64().unwrap() > 0.0);
}

#[test]
fn config_errors_exit_2_with_field_names() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = bps_scenario();
    v["grid"]["spacng"] = json!(1.0);
    let cfg = write_config(dir.path(), &v);
    let out = smectic(&["run", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("spacng") && err.contains("line"), "{err}");

    let mut v = bps_scenario();
    v["solution"] = json!("helicoid");
    let cfg = write_config(dir.path(), &v);
    let out = smectic(&["run", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("defects"));

    let mut v = bps_scenario();
    v["version"] = json!(7);
    let cfg = write_config(dir.path(), &v);
    assert_eq!(smectic(&["run", &cfg], dir.path()).status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3_naming_the_operation() {
    let dir = tempfile::tempdir().unwrap();
    let v = json!({
        "version": 1,
        "solution": "flow",
        "flow_options": { "seed": { "type": "circle", "centre": [0.0, 0.0], "radius": 1.0, "n_points": 64 }, "n_layers": 2, "dn": -0.1 },
        "outputs": [{ "field": "stack", "format": "csv", "path": "stack.csv" }]
    });
    let cfg = write_config(dir.path(), &v);
    let out = smectic(&["run", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("flow::generate_stack"));
}

#[test]
fn verify_single_suite_and_unknown_suite() {
    let dir = tempfile::tempdir().unwrap();
    let out = smectic(&["verify", "cutoff-identity"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("[PASS]"));
    assert_eq!(smectic(&["verify", "no-such-check"], dir.path()).status.code(), Some(2));
    // Known reds make the full suite exit with the verification code.
    assert_eq!(smectic(&["--quiet", "verify", "edge-energy"], dir.path()).status.code(), Some(4));
}

#[test]
fn export_defaults_is_a_runnable_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let out = smectic(&["export-defaults"], dir.path());
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["version"], 1);
    let cfg = write_config(dir.path(), &v);
    let out = smectic(&["--quiet", "--threads", "2", "run", &cfg], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("manifest.json").exists());
}
