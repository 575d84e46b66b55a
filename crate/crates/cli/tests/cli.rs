use std::path::Path;
use std::process::{Command, Output};

fn dqs(dir: &Path, command: &str, config: &str, extra: &[&str]) -> Output {
    let path = dir.join(format!("{command}.toml"));
    std::fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_dqs"))
        .arg(command)
        .arg("--config")
        .arg(&path)
        .args(extra)
        .env_remove("DQS_THREADS")
        .output()
        .unwrap()
}

/// Data rows keyed by header name.
fn rows(out: &Output) -> Vec<Vec<(String, String)>> {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    reader
        .records()
        .map(|r| header.iter().cloned().zip(r.unwrap().iter().map(String::from)).collect())
        .collect()
}

fn field(row: &[(String, String)], key: &str) -> f64 {
    row.iter().find(|(k, _)| k == key).unwrap().1.parse().unwrap()
}

const SEPARABLE_FOCK1: &str = r#"
[probe]
kind = "separable"
modes = 2
base = { family = "fock", n = 1 }

[grid]
alpha = [0.001]
"#;

#[test]
fn bounds_on_separable_fock_pair() {
    let dir = tempfile::tempdir().unwrap();
    let out = dqs(dir.path(), "bounds", SEPARABLE_FOCK1, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(text.starts_with("# dqs ") && text.lines().next().unwrap().contains("table=v1 command=bounds"));
    let r = rows(&out);
    assert_eq!(r.len(), 1);
    assert_eq!(field(&r[0], "bound_eq10"), 40.0);
    assert!((field(&r[0], "cfi") - 24.0).abs() < 0.24);
    assert_eq!(r[0].iter().find(|(k, _)| k == "chain_violation").unwrap().1, "false");
}

#[test]
fn two_mode_squeezed_homodyne_column() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"
[probe]
base = { family = "squeezed_vacuum", r = 0.6931471805599453 }

[grid]
alpha = [0.01, 0.1]
"#;
    let out = dqs(dir.path(), "two-mode", config, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for r in rows(&out) {
        assert!((field(&r, "homodyne_two_copies") - 32.0).abs() < 1e-9);
        assert_eq!(field(&r, "sql"), 8.0);
    }
}

#[test]
fn empty_grid_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = SEPARABLE_FOCK1.replace("alpha = [0.001]", "alpha = []");
    let out = dqs(dir.path(), "bounds", &config, &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.alpha is empty"));
    assert!(out.stdout.is_empty());
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!("{SEPARABLE_FOCK1}\n[numerics]\nfd_rell = 0.1\n");
    let out = dqs(dir.path(), "bounds", &config, &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn heating_outside_first_order_regime_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"
[probe]
kind = "separable"
modes = 2
base = { family = "fock", n = 1 }

[grid]
noise_alpha = 0.05
noise = [{ kind = "heating", kappa_t = 1e-2, nbar = 5.0 }]
"#;
    let out = dqs(dir.path(), "noise-scan", config, &[]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let config = SEPARABLE_FOCK1.replace("alpha = [0.001]", "alpha_range = { start = 0.001, stop = 0.2, count = 6 }");
    let a = dqs(dir.path(), "saturate", &config, &["--threads", "1"]);
    let b = dqs(dir.path(), "saturate", &config, &["--threads", "3"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(rows(&a).len(), 6);
}

#[test]
fn json_output_carries_config_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out.json");
    let out = dqs(dir.path(), "bounds", SEPARABLE_FOCK1, &["--format", "json", "--out", target.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&target).unwrap()).unwrap();
    assert_eq!(v["command"], "bounds");
    assert_eq!(v["config"]["probe"]["modes"], 2);
    assert_eq!(v["result"]["reports"].as_array().unwrap().len(), 1);
    assert!(v["result"]["reports"][0]["metadata"]["fd_step"].is_number());
}

#[test]
fn mismatched_command_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!("command = \"validate\"\n{SEPARABLE_FOCK1}");
    let out = dqs(dir.path(), "bounds", &config, &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn validate_breach_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dqs(dir.path(), "validate", "[validate]\nanalytic_tolerance = 1e-16\ntolerance = 1e-16\n", &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(rows(&out).iter().any(|r| r.iter().any(|(k, v)| k == "pass" && v == "false")));
}
