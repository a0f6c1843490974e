use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], config: Option<&str>, out: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hopfield"));
    cmd.args(args).arg("--out").arg(out);
    if let Some(text) = config {
        let path = out.join("config.json");
        fs::create_dir_all(out).unwrap();
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn column(csv: &str, name: &str) -> Vec<Option<f64>> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(i).unwrap().parse().ok()).collect()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn surface_sweep_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["dispersion"], Some(r#"{"dispersion": {"k_min": 1.0, "k_max": 10.0, "points": 64}}"#), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("dispersion.csv")).unwrap();
    assert!(csv.starts_with("k_par,omega_lower,omega_upper,omega_surface\n"));
    let s: Vec<f64> = column(&csv, "omega_surface").into_iter().map(Option::unwrap).collect();
    assert_eq!(s.len(), 64);
    assert!(s.windows(2).all(|w| w[1] > w[0]));
    assert!(dir.path().join("dispersion.json").exists());
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = r#"{"lossy": {"points": 40}, "solve": {"cells": 600}}"#;
    for task in ["dispersion", "lossy", "solve", "mode"] {
        assert_eq!(run(&[task], Some(cfg), a.path()).status.code(), Some(0));
        assert_eq!(run(&[task], Some(cfg), b.path()).status.code(), Some(0));
    }
    for f in ["dispersion.csv", "lossy.csv", "solve_spectrum.csv", "solve_mode.csv", "mode.csv"] {
        let x = fs::read(a.path().join(f)).unwrap();
        let y = fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f} differs between runs");
        assert!(!x.contains(&b'\r'));
    }
}

#[test]
fn malformed_json_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["dispersion"], Some("{\"medium\": {"), dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("malformed JSON"), "{}", stderr(&o));
}

#[test]
fn schema_violations_report_json_pointers() {
    let cases = [
        (r#"{"solve": {"cells": "many"}}"#, "/solve/cells"),
        (r#"{"medium": {"omega_t": 1.0, "omega_l": 1.2, "colour": 3}}"#, "/medium"),
        (r#"{"dispersion": {"k_min": 5.0, "k_max": 1.0}}"#, "/dispersion/k_max"),
        (r#"{"medium": {"omega_t": 1.0, "omega_l": 0.9}}"#, "/medium/omega_l"),
        (r#"{"scatter": {"modes": [{"class": "S", "k_par": [2, 0]}, {"class": "TMv", "k_par": [0, 0]}]}}"#, "/scatter/modes/1/k_z"),
        (r#"{"lossy": {"bath": {"kind": "flat", "amplitude": 0.1, "zeta_min": 2.0, "zeta_max": 1.0}}}"#, "/lossy/bath"),
        (r#"{"verify": {"criteria": [1, 9]}}"#, "/verify/criteria/1"),
    ];
    for (cfg, pointer) in cases {
        let dir = tempfile::tempdir().unwrap();
        let o = run(&["dispersion"], Some(cfg), dir.path());
        assert_eq!(o.status.code(), Some(2), "{cfg}");
        assert!(stderr(&o).contains(&format!("at {pointer}")), "{cfg}: {}", stderr(&o));
    }
}

#[test]
fn missing_config_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_hopfield"))
        .args(["mode", "--config"])
        .arg(dir.path().join("absent.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numeric_failures_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    // below the light-line edge there is no surface mode
    let o = run(&["mode"], Some(r#"{"mode": {"class": "S", "k_par": [0.5, 0.0]}}"#), dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("mode failed"));
}

#[test]
fn wavenumber_units_scale_frequencies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"medium": {"omega_t": 400.0, "omega_l": 480.0}, "dispersion": {"k_min": 4000.0, "k_max": 40000.0, "points": 5}}"#;
    let o = run(&["dispersion", "--units", "cm-1"], Some(cfg), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("dispersion.csv")).unwrap();
    let k = column(&csv, "k_par");
    assert!((k[0].unwrap() - 4000.0).abs() < 1e-9);
    let s = column(&csv, "omega_surface");
    let w_surf = ((400.0f64.powi(2) + 480.0f64.powi(2)) / 2.0).sqrt();
    assert!((s[4].unwrap() - w_surf).abs() < 1e-4 * 400.0);
    let upper = column(&csv, "omega_upper");
    assert!(upper[0].unwrap() > 480.0);
}

#[test]
fn solve_finds_the_surface_mode() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["solve"], Some(r#"{"solve": {"cells": 1000}}"#), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("solve_spectrum.csv")).unwrap();
    let w = column(&csv, "omega")[0].unwrap();
    assert!((w - 1.087136099115766).abs() < 1e-4);
}

#[test]
fn scatter_flags_momentum_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"geometry": {"lz": 12.0, "area": 3.141592653589793},
        "scatter": {"modes": [{"class": "S", "k_par": [2, 0]}, {"class": "S", "k_par": [-1.9, 0]},
                              {"class": "TMv", "k_par": [0, 0], "k_z": 0.5}]}}"#;
    let o = run(&["scatter"], Some(cfg), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("scatter.csv")).unwrap();
    assert_eq!(csv.lines().nth(1).unwrap(), "0.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0,false");
}

#[test]
fn driven_field_reports_closed_energy_balance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"lossy": {"points": 10, "bath": {"kind": "ohmic", "alpha": 0.05, "cutoff": 4.0},
        "driven": {"omega": 1.1, "k_par": 0.3, "sheets": [{"z": 0.5, "amplitude": [1.0, 0.0]}],
                   "z_min": -3.0, "z_max": 2.0, "points": 11}}}"#;
    let o = run(&["lossy"], Some(cfg), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("lossy.json")).unwrap()).unwrap();
    let r = meta["results"]["energy_audit"]["relative_residual"].as_f64().unwrap();
    assert!(r < 1e-6, "{r}");
    assert_eq!(fs::read_to_string(dir.path().join("lossy_driven.csv")).unwrap().lines().count(), 12);
}

#[test]
fn verify_passes_on_the_default_medium() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify"], None, dir.path());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{stdout}{}", stderr(&o));
    assert_eq!(stdout.lines().filter(|l| l.starts_with("[PASS]")).count(), 8);
    assert!(dir.path().join("verify.csv").exists());
    assert!(dir.path().join("verify_dispersion.csv").exists());
}

#[test]
fn verify_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--tol", "1e-30"], Some(r#"{"verify": {"criteria": [1]}}"#), dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("[FAIL] 1."));
}
