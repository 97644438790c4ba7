use std::fs;
use std::process::{Command, Output};

fn zeno_qfi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zeno-qfi"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn ratio_vs_n_csv_has_units_and_scientific_cells() {
    let o = zeno_qfi(&["ratio-vs-N", "--n", "1,2,3", "--gamma", "1.0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.contains("N [qubits]") && header.contains("ratio_en_over_se [1]"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "1");
    assert_eq!(first[4], "1.00000000000e+00");
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"mode": "qfi-vs-gamma", "N_list": [3, 5], "omega0_tau": 0.5}"#).unwrap();
    let mut outputs = Vec::new();
    for (name, extra) in [("a.csv", None), ("b.csv", Some("--sequential"))] {
        let out = dir.path().join(name);
        let mut args = vec!["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
        args.extend(extra);
        let o = zeno_qfi(&args);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(fs::read(out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(String::from_utf8(outputs[0].clone()).unwrap().lines().count(), 1 + 2 * 61);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"mode": "zeno-time", "N_list": [1], "m": [1, 4], "gamma_over_omega0": [0.5]}"#).unwrap();
    let o = zeno_qfi(&["--config", cfg.to_str().unwrap(), "--m", "16", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["mode"], "zeno-time");
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][1], 16);
}

#[test]
fn config_errors_exit_2() {
    assert_eq!(zeno_qfi(&[]).status.code(), Some(2));
    assert_eq!(zeno_qfi(&["no-such-mode"]).status.code(), Some(2));
    assert_eq!(zeno_qfi(&["zeno-time", "--omega0-tau", "-1"]).status.code(), Some(2));
    assert_eq!(zeno_qfi(&["zeno-time", "--format", "xml"]).status.code(), Some(2));
    assert_eq!(zeno_qfi(&["zeno-time", "--mode", "verify"]).status.code(), Some(2));
    assert_eq!(zeno_qfi(&["--config", "/nonexistent/cfg.json"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"mode": "verify", "unknown_field": 1}"#).unwrap();
    assert_eq!(zeno_qfi(&["--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn verify_passes_by_default_and_fails_with_corrupted_tolerance() {
    let o = zeno_qfi(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("complete_basis_solver_vs_sld"));
    let o = zeno_qfi(&["verify", "--n", "1,2", "--tolerance-scale", "1e-30"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAILED"));
}

#[test]
fn qfi_vs_gamma_reports_cross_checks() {
    let o = zeno_qfi(&["qfi-vs-gamma", "--n", "1,2,3", "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let err = String::from_utf8_lossy(&o.stderr);
    assert_eq!(err.matches("PASS").count(), 3, "{err}");
}
