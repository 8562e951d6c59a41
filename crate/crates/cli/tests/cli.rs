#![allow(clippy::excessive_precision)]

use std::path::PathBuf;
use std::process::{Command, Output};

use clap::Parser;
use serde_json::Value;
use steklov_cli::{run, Cli, RunConfig, DPS_ENV, EXIT_CONFIG, EXIT_OK, EXIT_VIOLATION};
use steklov_core::report::{Endpoints, ReportRecord};
use steklov_core::{Interval, Mp};

fn steklov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_steklov")).args(args).env_remove(DPS_ENV).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("steklov-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn configuration_errors_exit_3_and_name_the_flag() {
    for (args, flag) in [
        (vec!["enclose", "--n", "2"], "--n"),
        (vec!["enclose", "--n", "5", "--dps", "20"], "--dps"),
        (vec!["enclose", "--n", "5", "--m", "0"], "--m"),
        (vec!["table", "--from", "6", "--to", "4"], "--to"),
        (vec!["gaps", "--from", "5", "--to", "5"], "--to"),
        (vec!["expand", "--step", "0"], "--step"),
        (vec!["enclose", "--n", "five"], "--n"),
        (vec!["enclose", "--bogus"], "--bogus"),
    ] {
        let o = steklov(&args);
        assert_eq!(code(&o), EXIT_CONFIG, "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).contains(flag), "{args:?}");
    }
}

#[test]
fn environment_precision_override() {
    let o = Command::new(env!("CARGO_BIN_EXE_steklov"))
        .args(["enclose", "--n", "5", "--m", "20", "--format", "json"])
        .env(DPS_ENV, "35")
        .output()
        .unwrap();
    assert_eq!(code(&o), EXIT_OK);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["parameters"]["dps"], 35);
    let bad = Command::new(env!("CARGO_BIN_EXE_steklov")).args(["enclose", "--n", "5"]).env(DPS_ENV, "lots").output().unwrap();
    assert_eq!(code(&bad), EXIT_CONFIG);
}

#[test]
fn json_is_byte_identical_across_runs() {
    let args = ["enclose", "--n", "7", "--m", "40", "--dps", "40", "--format", "json", "--per-block"];
    let a = steklov(&args);
    let b = steklov(&args);
    assert_eq!(code(&a), EXIT_OK);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["command"], "enclose");
    let records = v["records"].as_array().unwrap();
    assert_eq!(records[0]["kind"], "sigma_row");
    assert_eq!(records.iter().filter(|r| r["kind"] == "block_row").count(), 7);
}

#[test]
fn emitted_sigma_row_round_trips() {
    let cli = Cli::try_parse_from(["steklov", "enclose", "--n", "6", "--m", "40", "--dps", "50", "--format", "json"]).unwrap();
    let cfg = RunConfig::from_cli(cli).unwrap();
    let outcome = run(&cfg).unwrap();
    let json = serde_json::to_string(&outcome).unwrap();
    let v: Value = serde_json::from_str(&json).unwrap();
    let row: ReportRecord = serde_json::from_value(v["records"][0].clone()).unwrap();
    let ReportRecord::SigmaRow(row) = row else { panic!("not a sigma row") };
    let bits = cfg.precision.bits();
    let parsed: Interval<Mp> = row.sigma.to_interval(bits).unwrap();
    let direct = steklov_core::certify::sigma_enclosure(6, 40, cfg.precision).unwrap().interval();
    assert!(parsed.contains_interval(&direct));
    // the 18-decimal strings also enclose
    let shown = Endpoints { lo_exact: row.sigma.lo.clone(), hi_exact: row.sigma.hi.clone(), ..row.sigma.clone() };
    assert!(shown.to_interval::<Mp>(bits).unwrap().contains_interval(&direct));
}

#[test]
fn table_rows_meet_the_published_table() {
    let published = [
        (3, 0.621278808420295929, 0.621956648650589684),
        (10, 0.996058800482355868, 0.996371348839486788),
        (20, 0.999635685448956362, 0.999635736152520005),
    ];
    let o = steklov(&["table", "--from", "3", "--to", "20", "--m", "60", "--dps", "40", "--format", "json"]);
    assert_eq!(code(&o), EXIT_OK);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["records"].as_array().unwrap();
    assert_eq!(rows.len(), 18);
    for (n, lo, hi) in published {
        let r = &rows[n as usize - 3];
        assert_eq!(r["n"], n);
        let a: f64 = r["sigma"]["lo"].as_str().unwrap().parse().unwrap();
        let b: f64 = r["sigma"]["hi"].as_str().unwrap().parse().unwrap();
        assert!(a <= hi && lo <= b, "N={n}: [{a}, {b}]");
    }
}

#[test]
fn gaps_report_and_csv() {
    let out = scratch("gaps.csv");
    let o = steklov(&["gaps", "--from", "3", "--to", "8", "--m", "40", "--dps", "40", "--format", "csv", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), EXIT_OK);
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "N,gap_lo");
    assert_eq!(lines.len(), 6);
    assert!(lines[1..].iter().all(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap() > 0.0));
    let text = steklov(&["gaps", "--from", "3", "--to", "5", "--m", "40", "--dps", "40"]);
    assert!(stdout(&text).lines().last().unwrap().starts_with("PASS: 2 positive gaps"));
}

#[test]
fn constants_exit_on_the_flagged_rows() {
    let o = steklov(&["constants", "--dps", "40", "--format", "json"]);
    assert_eq!(code(&o), EXIT_VIOLATION);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"]["status"], "FAIL");
    let rows = v["records"].as_array().unwrap();
    let status = |name: &str| rows.iter().find(|r| r["name"] == name).unwrap()["status"].clone();
    assert_eq!(status("E0"), "PASS");
    assert_eq!(status("E1"), "FAIL");
    assert_eq!(status("C6"), "FAIL");
    assert_eq!(status("C6_recorded"), "INFO");
    assert!(rows.iter().all(|r| r["kind"] == "constant_row"));
}

#[test]
fn expand_csv_has_one_line_per_n() {
    let out = scratch("expand.csv");
    let o = steklov(&["expand", "--from", "50", "--to", "130", "--step", "10", "--dps", "40", "--format", "csv", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), EXIT_OK);
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 10);
    assert_eq!(csv.lines().next().unwrap(), "N,sigma_lo,sigma_hi,expansion_center,band_lo,band_hi");
}

#[test]
fn expand_overlays_small_n_enclosures() {
    let o = steklov(&["expand", "--n", "25", "--m", "80", "--dps", "40", "--recorded-constants", "--format", "json"]);
    assert_eq!(code(&o), EXIT_OK);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["records"][0]["inside_band"], true);
    let below = steklov(&["expand", "--n", "12", "--dps", "40"]);
    assert_eq!(code(&below), EXIT_VIOLATION);
}

#[test]
fn per_block_csv_goes_to_a_sibling_file() {
    let out = scratch("encl.csv");
    let o = steklov(&["enclose", "--n", "5", "--m", "30", "--dps", "40", "--format", "csv", "--per-block", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), EXIT_OK);
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 2);
    let blocks = std::fs::read_to_string(out.with_file_name("encl_blocks.csv")).unwrap();
    assert_eq!(blocks.lines().count(), 6);
    assert!(blocks.starts_with("N,residue,lambda_lo,lambda_hi,e_norm,c_norm"));
    let needs_out = steklov(&["enclose", "--n", "5", "--m", "30", "--dps", "40", "--format", "csv", "--per-block"]);
    assert_eq!(code(&needs_out), EXIT_CONFIG);
}

#[test]
fn unwritable_output_surfaces_the_path() {
    let o = steklov(&["enclose", "--n", "4", "--m", "10", "--dps", "40", "--out", "/nonexistent-dir/x.txt"]);
    assert_eq!(code(&o), steklov_cli::EXIT_IO);
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent-dir/x.txt"));
}

#[test]
fn schur_check_agrees() {
    let o = steklov(&["schur-check", "--n", "8", "--m", "80", "--dps", "40", "--format", "json"]);
    assert_eq!(code(&o), EXIT_OK);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["evidence"]["intersects"], true);
    assert_eq!(v["evidence"]["sign_change_certified"], true);
    assert_eq!(v["records"][0]["residue"], 1);
}

#[test]
fn verify_monotonicity_reports_both_halves() {
    let o = steklov(&["verify-monotonicity", "--m", "80", "--dps", "40", "--format", "json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["evidence"]["gaps"]["status"], "PASS");
    assert_eq!(v["records"].as_array().unwrap().len(), 17);
    // the recomputed remainder constant leaves the large-N margin negative
    assert_eq!(v["evidence"]["margin_positive"], false);
    assert_eq!(code(&o), EXIT_VIOLATION);
    let rec: f64 = v["evidence"]["margin_with_recorded_constants"]["lo"].as_str().unwrap().parse().unwrap();
    assert!(rec > 791.0);
}

#[test]
fn text_output_ends_with_the_verdict() {
    let o = steklov(&["enclose", "--n", "9", "--m", "40", "--dps", "40"]);
    let s = stdout(&o);
    assert!(s.starts_with("N=9 "));
    assert!(s.contains("argmax r=1"));
    assert!(s.lines().last().unwrap().starts_with("PASS: width"));
    assert_eq!(steklov(&["--help"]).status.code(), Some(EXIT_OK));
}
