//! End-to-end tests of the command-line binary: exit-status contract,
//! stdout/stderr separation, and bit-reproducibility.

use std::process::{Command, Output};

fn mbverify(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbverify"))
        .args(args)
        .output()
        .expect("binary runs")
}

const BARNES: &str =
    r#"{"family":"GustafsonFirst","N":1,"alphas":[[0.5,0],[0.5,0]],"betas":[[0.5,0],[0.5,0]],"a":null}"#;
const RPLUS: &str =
    r#"{"family":"RPlus","N":1,"alphas":[[0.4,0],[0.6,0]],"betas":[[0.5,0]],"a":[2.2,0]}"#;
const RPLUS_DIVERGENT: &str =
    r#"{"family":"RPlus","N":1,"alphas":[[0.4,0],[0.6,0]],"betas":[[0.5,0]],"a":[1.3,0]}"#;

#[test]
fn eval_barnes_inline_params() {
    let out = mbverify(&["eval", "--params", BARNES]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let v: serde_json::Value = serde_json::from_str(stdout.trim()).unwrap();
    let lhs = v["lhs"][0].as_f64().unwrap();
    assert!((lhs - 1.0).abs() < 1e-8, "lhs {lhs}");
    assert!((v["rhs"][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn eval_rhs_route_skips_quadrature() {
    let out = mbverify(&["eval", "--params", RPLUS, "--route", "rhs"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let v: serde_json::Value = serde_json::from_str(stdout.trim()).unwrap();
    assert!(v["lhs"].is_null());
    assert_eq!(v["evaluations"].as_u64(), Some(0));
}

#[test]
fn eval_divergent_r_instance_exits_2_quoting_the_condition() {
    let out = mbverify(&["eval", "--params", RPLUS_DIVERGENT]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty(), "diagnostics must not go to stdout");
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("Re(nu) > 0"), "stderr: {stderr}");
}

#[test]
fn eval_bad_params_exit_2() {
    let out = mbverify(&["eval", "--params", "/nonexistent.json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = mbverify(&["eval", "--params", r#"{"family":"RPlus","N":2,"alphas":[],"betas":[],"a":null}"#]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_single_instance_emits_one_json_line() {
    let out = mbverify(&["verify", "--params", BARNES]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = stdout.trim().lines().collect();
    assert_eq!(lines.len(), 1);
    let v: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(v["pass"].as_bool(), Some(true));
    assert_eq!(v["route"].as_str(), Some("quadrature"));
    assert_eq!(v["family"].as_str(), Some("GustafsonFirst"));
}

#[test]
fn verify_failing_tolerance_exits_1() {
    let out = mbverify(&["verify", "--params", BARNES, "--tol", "1e-16"]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let v: serde_json::Value = serde_json::from_str(stdout.trim()).unwrap();
    assert_eq!(v["pass"].as_bool(), Some(false));
}

#[test]
fn residue_agrees_with_predictions() {
    let rplus2 = r#"{"family":"RPlus","N":2,"alphas":[[0.4,0],[0.6,0],[0.8,0]],"betas":[[0.5,0],[0.7,0]],"a":[3.5,0]}"#;
    let out = mbverify(&["residue", "--params", rplus2]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let v: serde_json::Value = serde_json::from_str(stdout.trim()).unwrap();
    assert!(v["rel_err_reduced"].as_f64().unwrap() < 5e-3);
    assert!(v["rel_err_closed_form"].as_f64().unwrap() < 5e-3);
    assert_eq!(v["samples"].as_array().unwrap().len(), 3);
}

#[test]
fn residue_rejects_non_r_family_and_bad_epsilons() {
    let out = mbverify(&["residue", "--params", BARNES]);
    assert_eq!(out.status.code(), Some(2));
    let out = mbverify(&["residue", "--params", RPLUS, "--epsilons", "0.05,0.1,0.2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn suite_is_bit_reproducible_and_writes_csv() {
    let dir = std::env::temp_dir().join("mbverify-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let csv_path = dir.join("summary.csv");
    let args = [
        "suite",
        "--seed",
        "42",
        "--n",
        "1",
        "--instances",
        "2",
        "--out",
        csv_path.to_str().unwrap(),
    ];
    let first = mbverify(&args);
    assert!(first.status.success(), "stderr: {}", String::from_utf8_lossy(&first.stderr));
    let second = mbverify(&args);
    assert_eq!(first.stdout, second.stdout, "suite output must be byte-identical");
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("family,N,route,rel_err,pass\n"));
    assert!(csv.lines().count() > 1);
    // every emitted line parses as JSON and passes
    for line in String::from_utf8(first.stdout).unwrap().trim().lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["pass"].as_bool(), Some(true), "line: {line}");
    }
}

#[test]
fn suite_env_thread_cap_is_honored() {
    let out = Command::new(env!("CARGO_BIN_EXE_mbverify"))
        .args(["suite", "--n", "1", "--instances", "1", "--family", "GustafsonFirst"])
        .env("MBVERIFY_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    let bad = Command::new(env!("CARGO_BIN_EXE_mbverify"))
        .args(["suite", "--n", "1", "--instances", "1"])
        .env("MBVERIFY_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn sweep_axes() {
    let out = mbverify(&["sweep", "--axis", "nu", "--params", RPLUS, "--from", "0.3", "--to", "1.0", "--steps", "5"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.trim().lines();
    assert_eq!(lines.next(), Some("axis,result_re,result_im,error"));
    // Gamma(nu) shrinks over [0.3, 1.0], so |rhs| decreases monotonically
    let mags: Vec<f64> = lines
        .map(|l| {
            let cols: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (cols[1].powi(2) + cols[2].powi(2)).sqrt()
        })
        .collect();
    assert_eq!(mags.len(), 5);
    assert!(mags.windows(2).all(|w| w[1] < w[0]), "mags {mags:?}");

    let out = mbverify(&["sweep", "--axis", "u", "--params", RPLUS, "--from", "10", "--to", "40", "--steps", "4"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let devs: Vec<f64> = csv
        .trim()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert!(devs.last().unwrap() < devs.first().unwrap(), "ratio must approach 1: {devs:?}");

    let out = mbverify(&["sweep", "--axis", "height", "--params", RPLUS, "--from", "1.0", "--to", "2.0", "--steps", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_truncation_stabilizes() {
    let out = mbverify(&["sweep", "--axis", "truncation", "--params", RPLUS, "--from", "20", "--to", "40", "--steps", "3"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .trim()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    // successive values agree within the reported error estimates
    for w in rows.windows(2) {
        let d = ((w[1][1] - w[0][1]).powi(2) + (w[1][2] - w[0][2]).powi(2)).sqrt();
        assert!(d <= (w[0][3] + w[1][3]).max(1e-10), "rows {w:?}");
    }
}

#[test]
fn pretty_flag_emits_multiline_json() {
    let out = mbverify(&["eval", "--params", BARNES, "--route", "rhs", "--pretty"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().count() > 3);
}
