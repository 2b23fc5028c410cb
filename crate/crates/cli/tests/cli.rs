use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const COUPLING: &str = "x1^2 x2 + 2 x1 y1 x2 + y1^2 x2 + x1^2 y2 + 2 x1 y1 y2 + y1^2 y2";

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_lyapnorm"));
    c.env_remove("LYAPNORM_THREADS");
    c
}

fn model_file(dir: &Path, name: &str, lambda: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, format!(r#"{{"lambda": {lambda}, "hamiltonian": "{COUPLING}"}}"#)).unwrap();
    path
}

fn reference(dir: &Path) -> PathBuf {
    model_file(dir, "model.json", "[[0, 1], [0, 1.4142135623730951]]")
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output { status, stdout, stderr } = cmd.output().unwrap();
    (
        status.code().unwrap(),
        String::from_utf8(stdout).unwrap(),
        String::from_utf8(stderr).unwrap(),
    )
}

#[test]
fn normalize_writes_record_and_residuals() {
    let tmp = TempDir::new().unwrap();
    let model = reference(tmp.path());
    let out = tmp.path().join("out");
    let (code, stdout, _) = run(bin()
        .args(["normalize", "--order", "6", "--mode", "thm1", "--in"])
        .arg(&model)
        .arg("--out")
        .arg(&out));
    assert_eq!(code, 0);
    assert!(out.join("normalform.json").is_file());
    let rows = stdout.lines().filter(|l| l.trim_start().starts_with(|c: char| c.is_ascii_digit())).count();
    assert_eq!(rows, 6, "{stdout}");
    let rec: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("normalform.json")).unwrap()).unwrap();
    assert_eq!(rec["order"], 6);
    assert_eq!(rec["z"].as_array().unwrap().len(), 6);
}

#[test]
fn order_zero_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let model = reference(tmp.path());
    let (code, _, _) = run(bin().args(["normalize", "--order", "0", "--in"]).arg(&model));
    assert_eq!(code, 1);
}

#[test]
fn malformed_input_exits_one_with_location() {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("bad.json");
    fs::write(&path, r#"{"lambda": [[0, 1], [0, 2]], "hamiltonian": "x1^ x2"}"#).unwrap();
    let (code, _, stderr) = run(bin().args(["normalize", "--in"]).arg(&path));
    assert_eq!(code, 1);
    assert!(stderr.contains("column"), "{stderr}");

    fs::write(&path, r#"{"lambda": [[0, 1], [0, 2]], "hamiltonian": "x1^2 x3"}"#).unwrap();
    let (code, _, stderr) = run(bin().args(["normalize", "--in"]).arg(&path));
    assert_eq!(code, 1);
    assert!(stderr.contains("x3") || stderr.contains("index 3"), "{stderr}");

    fs::write(&path, r#"{"lambda": [[0, 1]], "hamiltonain": "x1^3"}"#).unwrap();
    let (code, _, stderr) = run(bin().args(["normalize", "--in"]).arg(&path));
    assert_eq!(code, 1);
    assert!(stderr.contains("hamiltonain"), "{stderr}");
}

#[test]
fn resonance_exits_two_and_reports_k() {
    let tmp = TempDir::new().unwrap();
    let model = model_file(tmp.path(), "res.json", "[[0, 1], [0, 2]]");
    let (code, _, stderr) = run(bin().args(["normalize", "--mode", "thm1", "--in"]).arg(&model));
    assert_eq!(code, 2);
    assert!(stderr.contains("[-2, 1]") || stderr.contains("[2, -1]"), "{stderr}");
}

#[test]
fn certify_passes_on_reference_model() {
    let tmp = TempDir::new().unwrap();
    let model = reference(tmp.path());
    let (code, stdout, _) = run(bin()
        .args(["certify", "--order", "6", "--d", "0.25", "--in"])
        .arg(&model)
        .arg("--out")
        .arg(tmp.path()));
    assert_eq!(code, 0, "{stdout}");
    let csv = fs::read_to_string(tmp.path().join("ledger.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let ratio = header.iter().position(|&h| h == "ratio").unwrap();
    let pass = header.iter().position(|&h| h == "pass").unwrap();
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    for row in rows {
        assert!(row[ratio].parse::<f64>().unwrap() < 1.0);
        assert_eq!(row[pass], "true");
    }
    let cert: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("certificate.json")).unwrap()).unwrap();
    assert!(cert["certificate"]["rho"].as_f64().unwrap() > 0.0);
}

#[test]
fn certify_rejects_half_domain_loss() {
    let tmp = TempDir::new().unwrap();
    let model = reference(tmp.path());
    let (code, _, _) = run(bin().args(["certify", "--d", "0.5", "--in"]).arg(&model));
    assert_eq!(code, 1);
}

#[test]
fn certify_without_perturbation_is_degenerate() {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("flat.json");
    fs::write(&path, r#"{"lambda": [[0, 1], [0, 1.4142135623730951]], "hamiltonian": "(0,1) x1 y1 + (0,1.4142135623730951) x2 y2"}"#).unwrap();
    let (code, _, _) = run(bin().args(["certify", "--order", "3", "--in"]).arg(&path).arg("--out").arg(tmp.path()));
    assert_eq!(code, 4);
}

#[test]
fn orbit_sweep_is_monotone() {
    let tmp = TempDir::new().unwrap();
    let model = reference(tmp.path());
    let (code, _, _) = run(bin()
        .args(["orbit", "--order", "6", "--from-order", "2", "--amplitude", "0.01", "--dt", "1e-3", "--in"])
        .arg(&model)
        .arg("--out")
        .arg(tmp.path()));
    assert_eq!(code, 0);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("orbit_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["monotone"], true);
    let runs = summary["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 5);
    assert!(runs[4]["residual"].as_f64().unwrap() <= 1e-6);
    let csv = fs::read_to_string(tmp.path().join("orbit.csv")).unwrap();
    assert!(csv.starts_with("t,re_x1,im_x1"));
}

#[test]
fn orbit_zero_amplitude_is_a_fixed_point() {
    let tmp = TempDir::new().unwrap();
    let model = reference(tmp.path());
    let (code, _, _) = run(bin().args(["orbit", "--order", "3", "--amplitude", "0", "--in"]).arg(&model).arg("--out").arg(tmp.path()));
    assert_eq!(code, 0);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("orbit_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["runs"][0]["residual"].as_f64(), Some(0.0));
}

#[test]
fn hyperbolic_orbit_is_flagged_aperiodic() {
    let tmp = TempDir::new().unwrap();
    let model = model_file(tmp.path(), "hyp.json", "[[1, 0], [0, 1]]");
    let (code, _, _) = run(bin().args(["orbit", "--order", "3", "--in"]).arg(&model).arg("--out").arg(tmp.path()));
    assert_eq!(code, 0);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("orbit_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["runs"][0]["aperiodic"], true);
}

#[test]
fn verify_default_suite_passes_and_is_reproducible() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let (code, _, _) = run(bin().args(["verify", "--seed", "7", "--out"]).arg(dir).env("LYAPNORM_THREADS", "2"));
        assert_eq!(code, 0);
    }
    let (ja, jb) = (fs::read(a.join("verify.json")).unwrap(), fs::read(b.join("verify.json")).unwrap());
    assert_eq!(ja, jb);
    let report: serde_json::Value = serde_json::from_slice(&ja).unwrap();
    assert_eq!(report["violations"], 0);
    assert_eq!(report["cauchy"]["trials"], 200);
}

#[test]
fn verify_with_no_trials_warns() {
    let tmp = TempDir::new().unwrap();
    let (code, _, stderr) = run(bin().args(["verify", "--trials", "0", "--out"]).arg(tmp.path()));
    assert_eq!(code, 0);
    assert!(stderr.contains("warning"));
}

#[test]
fn bad_thread_count_is_rejected() {
    let (code, _, _) = run(bin().args(["verify", "--trials", "0"]).env("LYAPNORM_THREADS", "zero"));
    assert_eq!(code, 1);
}

#[test]
fn convert_produces_a_usable_model() {
    let tmp = TempDir::new().unwrap();
    let real = tmp.path().join("real.json");
    fs::write(
        &real,
        r#"{"hamiltonian": "0.5 x1^2 + 0.5 y1^2 + 0.7071067811865476 x2^2 + 0.7071067811865476 y2^2 + x1^2 x2"}"#,
    )
    .unwrap();
    let (code, _, _) = run(bin().args(["convert", "--in"]).arg(&real).arg("--out").arg(tmp.path()));
    assert_eq!(code, 0);
    let model = tmp.path().join("model.json");
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&model).unwrap()).unwrap();
    assert_eq!(v["lambda"][1][1].as_f64(), Some(2f64.sqrt()));
    let (code, _, _) = run(bin().args(["normalize", "--order", "3", "--in"]).arg(&model).arg("--out").arg(tmp.path()));
    assert_eq!(code, 0);
}

#[test]
fn normalize_output_is_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let model = reference(tmp.path());
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let dir = tmp.path().join(name);
        let (code, _, _) = run(bin().args(["normalize", "--order", "4", "--in"]).arg(&model).arg("--out").arg(&dir));
        assert_eq!(code, 0);
        outputs.push(fs::read(dir.join("normalform.json")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}
