use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn quartdiv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quartdiv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn sum_t_at_two_gives_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"fixture": "unit", "main": false}"#);
    let out = quartdiv(&["sum", "--config", &cfg, "--x-list", "2", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "kind,X,Y,exact_sum,predicted_main,ratio,nu_cutoff,prime_cutoff,wall_time_ms"
    );
    assert_eq!(lines.next().unwrap(), "T,2,,2,,,,,0");
    assert_eq!(lines.next(), None);
}

#[test]
fn output_is_identical_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"fixture": "real_disc", "kinds": ["T", "S_star", "Tg_prime"], "Y": 200,
            "prime_cutoff": 200, "nu_max": 6}"#,
    );
    let a = quartdiv(&["sum", "--config", &cfg, "--x-list", "30,60", "--workers", "1"]);
    let b = quartdiv(&["sum", "--config", &cfg, "--x-list", "30,60", "--workers", "3"]);
    let c = quartdiv(&["sum", "--config", &cfg, "--x-list", "30,60", "--workers", "3"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(b.stdout, c.stdout);
    let j = json_of(&a);
    assert_eq!(j["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(j["truncation"]["prime_cutoff"], 200);
    assert_eq!(j["truncation"]["nu_max"], 6);
    assert_eq!(j["result"].as_array().unwrap().len(), 6);
    // the hash tracks the sweep
    let d = json_of(&quartdiv(&["sum", "--config", &cfg, "--x-list", "30"]));
    assert_ne!(d["config_hash"], j["config_hash"]);
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("r.json");
    let out = quartdiv(&["delta", "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let j: Value = serde_json::from_str(&std::fs::read_to_string(out_path).unwrap()).unwrap();
    assert_eq!(j["command"], "delta");
    assert_eq!(j["result"][0]["delta"], 1);
}

#[test]
fn malformed_json_exits_two_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", "{\n  \"x_list\": [10,\n}\n");
    let out = quartdiv(&["sum", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("bad.json:3:1"), "{err}");
}

#[test]
fn hypothesis_violations_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let h2 = write_config(dir.path(), "h2.json", r#"{"forms": {"L1": [1, 0], "L2": [2, 0], "Q": [1, 1, 0]}}"#);
    let out = quartdiv(&["rho", "--config", &h2]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("H2"));
    let h3 = write_config(dir.path(), "h3.json", r#"{"forms": {"L1": [1, -1], "L2": [0, 1], "Q": [1, 1, 0]}}"#);
    let out = quartdiv(&["rho", "--config", &h3]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("H3"));
    let out = quartdiv(&["rho", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2));
    let out = quartdiv(&["sum"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn constants_report_tails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"prime_cutoff": 500, "nu_max": 8, "samples": 10000}"#);
    let j = json_of(&quartdiv(&["constants", "--config", &cfg, "--x-list", "100"]));
    let r = &j["result"];
    assert!(r["C"]["tail_estimate"].as_f64().unwrap() > 0.0);
    assert!(r["C_star"]["tail_estimate"].as_f64().unwrap() > 0.0);
    assert_eq!(r["C"]["accelerated"], true);
    assert!((r["L_one_chi"]["value"].as_f64().unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-5);
    assert_eq!(r["archimedean"][0]["seed"], 0);
}

#[test]
fn rho_sigma_and_discrepancy_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"indices": [[5, 1, 1], [1, 1, 5]], "primes": [3], "prime_cutoff": 50, "nu_max": 4,
            "lod_v": [2, 2, 2]}"#,
    );
    let j = json_of(&quartdiv(&["rho", "--config", &cfg]));
    assert_eq!(j["result"][0]["rho"]["count"], 5);
    assert_eq!(j["result"][1]["rho_star"]["count"], 8);
    let j = json_of(&quartdiv(&["sigma", "--config", &cfg]));
    assert_eq!(j["result"]["local"][0]["p"], 3);
    let j = json_of(&quartdiv(&["discrepancy", "--config", &cfg, "--x-list", "20"]));
    assert_eq!(j["result"]["rows"][0]["level_of_distribution"]["classes"], 8);
}

#[test]
fn quick_verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "v.json",
        r#"{"scale": "quick", "forms": {"L1": [1, 2], "L2": [1, 0], "Q": [2, 3, 1]}}"#,
    );
    let out = quartdiv(&["verify", "--config", &cfg]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(0), "{err}");
    assert!(err.lines().all(|l| l.starts_with("PASS")), "{err}");
    let j: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(j["result"]["cases"][0], "config");
}
