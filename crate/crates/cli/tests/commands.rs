use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn ipdsaw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ipdsaw"))
        .args(args)
        .env_remove("IPDSAW_TABLE_BUDGET_BYTES")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ipdsaw-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn constants_report() {
    let out = ipdsaw(&["constants", "--beta", "2.0"]);
    assert!(out.status.success());
    let r = json(&out);
    assert_eq!(r["schema_version"], 1);
    let bc = r["results"]["beta_c"].as_f64().unwrap();
    assert!((bc - 1.2187).abs() < 1e-4);
    assert!(r["results"]["delta2"].as_f64().unwrap() < 1.0);
    assert_eq!(r["all_passed"], true);
}

#[test]
fn partition_with_brute_force() {
    let out = ipdsaw(&["partition", "--beta", "2.0", "--lmax", "12", "--check-bruteforce"]);
    assert!(out.status.success());
    let r = json(&out);
    assert_eq!(r["checks"][0]["passed"], true);
    assert_eq!(r["results"]["rows"].as_array().unwrap().len(), 13);
}

#[test]
fn partition_csv_has_a_sidecar() {
    let path = scratch("circ.csv");
    let out = ipdsaw(&[
        "partition",
        "--lmax",
        "30",
        "--variant",
        "circ",
        "--format",
        "csv",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("L,log_value\n0,-inf\n"));
    assert_eq!(csv.lines().count(), 32);
    let side: Value = serde_json::from_str(&std::fs::read_to_string(path.with_extension("json")).unwrap()).unwrap();
    assert_eq!(side["variant"], "circ");
    assert_eq!(side["format_version"], 1);
    assert!(side["code_version"].is_string());
}

#[test]
fn excursion_csv_and_json() {
    let out = ipdsaw(&["excursion", "--n", "6", "--area-cap", "40", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("k,prob\n0,0.0000000000000000e0\n"));
    let meta: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(meta["n"], 6);

    let out = ipdsaw(&["excursion", "--n", "6", "--area-cap", "40"]);
    assert_eq!(json(&out)["checks"][0]["id"], "height_cap_tail");
}

#[test]
fn scans_emit_rows() {
    let out = ipdsaw(&["llt-scan", "--n", "8,12", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("n,q,area,probability,ratio,tail_bound,retained_mass\n8,"));

    let out = ipdsaw(&["em-scan", "--n", "50,100", "--q", "1"]);
    let rows = json(&out)["results"].as_array().unwrap().len();
    assert_eq!(rows, 2 * 2 + 2);

    let out = ipdsaw(&["fit", "--lmin", "100", "--lmax", "200"]);
    assert!(json(&out)["results"][0]["sqrt_coeff"].as_f64().unwrap() < 0.0);
}

#[test]
fn samples_feed_the_bead_survey() {
    let path = scratch("samples.txt");
    let out = ipdsaw(&[
        "sample",
        "--length",
        "60",
        "--count",
        "50",
        "--seed",
        "3",
        "--format",
        "csv",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let again = ipdsaw(&[
        "sample", "--length", "60", "--count", "50", "--seed", "3", "--format", "csv",
    ]);
    assert_eq!(std::fs::read(&path).unwrap(), again.stdout);

    let out = ipdsaw(&[
        "beads",
        "--input",
        path.to_str().unwrap(),
        "--k-grid",
        "0,10,60",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,empirical_prob,count");
    assert!(lines[3].ends_with(",50"));
}

#[test]
fn errors_carry_module_context() {
    let out = Command::new(env!("CARGO_BIN_EXE_ipdsaw"))
        .args(["partition", "--lmax", "5000"])
        .env("IPDSAW_TABLE_BUDGET_BYTES", "1000")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("stretch") && msg.contains("budget"), "{msg}");

    let out = ipdsaw(&["constants", "--beta", "1.0"]);
    assert_eq!(out.status.code(), Some(3));

    let out = ipdsaw(&["llt-scan", "--q", "0.3", "--n", "7"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("llt_ratio"));

    assert_eq!(ipdsaw(&["verify-all", "--format", "csv"]).status.code(), Some(2));
    assert_eq!(ipdsaw(&["no-such-command"]).status.code(), Some(2));
}
