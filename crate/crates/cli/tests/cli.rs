use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use krein_pt_cli::{load_config, parse_config};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_krein-pt")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn write_config(dir: &tempfile::TempDir, name: &str, json: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, json).unwrap();
    path
}

fn run(cmd: &str, config: &Path, out: Option<&Path>) -> Output {
    let mut c = Command::new(bin());
    c.arg(cmd).arg("--config").arg(config);
    if let Some(out) = out {
        c.arg("--out").arg(out);
    }
    c.output().unwrap()
}

fn csv_column(text: &str, name: &str) -> Vec<String> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(col).unwrap().to_string())
        .collect()
}

#[test]
fn shipped_configs_load() {
    for name in ["cubic.json", "oscillator.json", "cubic_ehrenfest.json"] {
        load_config(&configs().join(name)).unwrap();
    }
    let full = load_config(&configs().join("cubic.json")).unwrap();
    assert_eq!(full, parse_config(r#"{"potential":"i*x^3"}"#).unwrap());
}

#[test]
fn oscillator_spectrum_starts_one_three_five() {
    let out = run("spectrum", &configs().join("oscillator.json"), None);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let energies: Vec<f64> = csv_column(&text, "re_energy")
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    for (k, e) in energies.iter().take(3).enumerate() {
        let exact = (2 * k + 1) as f64;
        assert!((e - exact).abs() < 1e-4 * exact, "{e}");
    }
    assert_eq!(csv_column(&text, "krein_sign"), ["1", "-1", "1", "-1", "1"]);
    assert!(csv_column(&text, "complex_flag")
        .iter()
        .all(|f| f == "false"));
}

#[test]
fn non_pt_potential_fails_validation_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "x3.json", r#"{"potential":"x^3"}"#);
    let target = dir.path().join("spectrum.csv");
    let out = run("spectrum", &cfg, Some(&target));
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    assert!(!target.exists());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "NotPTSymmetric");
    assert_eq!(err["exit_code"], 1);
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "even.json", r#"{"domain":{"points":2000}}"#);
    let out = run("spectrum", &cfg, None);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "ConfigError");
    assert_eq!(err["key"], "domain.points");

    let out = run("spectrum", &dir.path().join("missing.json"), None);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["key"], "io");
}

#[test]
fn non_convergence_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "tight.json", r#"{"solver":{"residual_tol":1e-300}}"#);
    let out = run("spectrum", &cfg, None);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "ConvergenceFailure");
}

#[test]
fn mixed_signature_initial_state_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "mixed.json",
        r#"{"dynamics":{"initial_states":[0,1]}}"#,
    );
    let out = run("evolve", &cfg, None);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "SuperselectionViolation");
}

#[test]
fn cubic_report_meets_orthogonality_tolerance() {
    let out = run("report", &configs().join("cubic.json"), None);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["gram"]["max_gram_offdiag"].as_f64().unwrap() < 1e-6);
    assert!(report["gram"]["max_hilbert_offdiag"].as_f64().unwrap() > 1e-5);
    assert!(report["dynamics"]["krein_drift"].as_f64().unwrap() < 1e-10);
    for (name, ok) in report["checks"].as_object().unwrap() {
        assert_eq!(ok, true, "{name}");
    }
    assert_eq!(report["all_passed"], true);
}

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("cubic.json");
    for cmd in ["spectrum", "gram", "classify", "evolve"] {
        let a = dir.path().join(format!("{cmd}_a.csv"));
        let b = dir.path().join(format!("{cmd}_b.csv"));
        assert_eq!(run(cmd, &cfg, Some(&a)).status.code(), Some(0));
        assert_eq!(run(cmd, &cfg, Some(&b)).status.code(), Some(0));
        let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
        assert_eq!(a, b, "{cmd}");
        assert!(!a.contains(&b'\r'));
    }
}

#[test]
fn modes_and_current_emit_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "small.json",
        r#"{"potential":"i*x^3","domain":{"points":401},"solver":{"num_states":2}}"#,
    );
    let modes = String::from_utf8(run("modes", &cfg, None).stdout).unwrap();
    assert_eq!(modes.lines().next().unwrap(), "state,x,re_psi,im_psi");
    assert_eq!(csv_column(&modes, "x").len(), 2 * 401);
    let current = String::from_utf8(run("current", &cfg, None).stdout).unwrap();
    assert_eq!(csv_column(&current, "re_j").len(), 2 * 401);
    assert!(current.contains("# state_0_conserved=true"));
}

#[test]
fn evolve_leaves_ehrenfest_blank_at_the_ends() {
    let out = run("evolve", &configs().join("cubic_ehrenfest.json"), None);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let residuals = csv_column(&text, "ehrenfest_residual");
    assert_eq!(residuals.len(), 101);
    assert!(residuals[0].is_empty() && residuals[100].is_empty());
    assert!(residuals[1..100]
        .iter()
        .all(|r| r.parse::<f64>().unwrap() < 1e-2));
    let krein: Vec<f64> = csv_column(&text, "krein_norm")
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    assert!(krein
        .iter()
        .all(|k| (k - krein[0]).abs() < 1e-10 * krein[0].abs()));
}

#[test]
fn json_format_wraps_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "json.json",
        r#"{"potential":"x^2","solver":{"num_states":2},"output":{"format":"json"}}"#,
    );
    let out = run("spectrum", &cfg, None);
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["rows"].as_array().unwrap().len(), 2);
    assert_eq!(value["rows"][1]["krein_sign"], -1);
}
