use std::path::PathBuf;
use std::process::{Command, Output};

use leafrf_core::discrete::SearchReport;
use leafrf_core::linksim::DistanceSweepResult;
use leafrf_core::synth::MatchSolution;

fn leafrf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_leafrf")).args(args).output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = leafrf(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fixture(name: &str) -> String {
    format!("{}/../core/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("leafrf-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn match_inline_load() {
    let text = stdout(&["match", "--load", "25-10j"]);
    assert!(text.starts_with("load 25-10j ohm at 915 MHz"));
    assert!(text.lines().filter(|l| l.contains("; S11 ")).count() >= 2);
    let sols: Vec<MatchSolution> = serde_json::from_str(&stdout(&["match", "--load", "25-10j", "--format", "json"])).unwrap();
    assert!(sols.len() >= 2);
    assert!(sols.iter().all(|s| s.achieved_gamma.magnitude() < 1e-9));
}

#[test]
fn match_already_matched() {
    assert!(stdout(&["match", "--load", "50+0j"]).contains("already matched: empty network"));
}

#[test]
fn match_measured_fixture() {
    let sols: Vec<MatchSolution> =
        serde_json::from_str(&stdout(&["match", "--s1p", &fixture("antenna.s1p"), "--format", "json"])).unwrap();
    assert!(!sols.is_empty());
    assert!(sols.iter().all(|s| s.achieved_s11_db <= -60.0));
}

#[test]
fn exit_codes() {
    assert_eq!(leafrf(&["--bogus"]).status.code(), Some(2));
    let usage = leafrf(&["match"]);
    assert_eq!(usage.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&usage.stderr).contains("Usage"));
    assert_eq!(leafrf(&["match", "--load", "abc"]).status.code(), Some(2));
    assert_eq!(leafrf(&["--f0", "915Mhz", "match", "--load", "25"]).status.code(), Some(2));
    assert_eq!(leafrf(&["match", "--s1p", "/definitely/missing.s1p"]).status.code(), Some(2));
    assert_eq!(leafrf(&["match", "--load", "0+30j"]).status.code(), Some(3));
    assert_eq!(leafrf(&["link", "--from", "0.1", "--to", "1", "--step", "0.1"]).status.code(), Some(3));
    assert_eq!(leafrf(&["skin", "--material", "unobtainium"]).status.code(), Some(2));
}

#[test]
fn unit_suffixes_reach_the_library() {
    // same result whichever way f0 is spelled
    let a = stdout(&["--f0", "915MHz", "match", "--load", "25-10j", "--format", "json"]);
    let b = stdout(&["--f0", "0.915GHz", "match", "--load", "25-10j", "--format", "json"]);
    let c = stdout(&["--f0", "915e6", "match", "--load", "25-10j", "--format", "json"]);
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn csv_elements_feed_back_into_sweep() {
    let csv = stdout(&["match", "--resonator", "10ohm,18nH,1.2pF", "--format", "csv"]);
    let row = csv.lines().nth(1).unwrap();
    let elements = row.split(',').nth(2).unwrap();
    let sweep = stdout(&[
        "sweep", "--resonator", "10ohm,18nH,1.2pF", "--elements", elements, "--from", "915MHz", "--to", "916MHz", "--points", "2",
        "--format", "csv",
    ]);
    let first = sweep.lines().nth(1).unwrap();
    assert!(first.starts_with("915000000,"));
    assert!(first.ends_with(",-200"), "{first}");
}

#[test]
fn optimize_is_seed_deterministic() {
    let args = ["optimize", "--resonator", "10ohm,18nH,1.2pF", "--tolerance", "5", "--samples", "300", "--format", "json"];
    let a = stdout(&[&args[..], &["--seed", "9"]].concat());
    let b = stdout(&[&args[..], &["--seed", "9"]].concat());
    let c = stdout(&[&args[..], &["--seed", "10"]].concat());
    assert_eq!(a, b);
    assert_ne!(a, c);
    let rep: SearchReport = serde_json::from_str(&a).unwrap();
    assert_eq!(serde_json::to_string_pretty(&rep).unwrap() + "\n", a);
    assert_eq!(rep.candidates_evaluated, 25);
}

#[test]
fn snap_reports_the_dip_shift() {
    let text = stdout(&["snap", "--resonator", "10ohm,18nH,1.2pF"]);
    assert!(text.contains("series-L 10.69 nH -> 11 nH"), "{text}");
    assert!(text.contains("dip: 914 MHz ideal, 910 MHz snapped"), "{text}");
}

#[test]
fn link_csv_and_json() {
    let csv = stdout(&["link", "--format", "csv"]);
    assert_eq!(csv.lines().next().unwrap(), "distance_m,received_w,charge_s");
    assert_eq!(csv.lines().count(), 8);
    assert!(csv.lines().nth(3).unwrap().starts_with("1,0.000679797,2.35364"));
    let r: DistanceSweepResult = serde_json::from_str(&stdout(&["link", &fixture("link_budget.json"), "--format", "json"])).unwrap();
    assert_eq!(r.rows.len(), 7);
}

#[test]
fn skin_depth_text() {
    assert_eq!(stdout(&["skin"]), "2.15657 µm (copper at 915 MHz)\n");
    assert!(stdout(&["skin", "--material", "custom", "--rho", "1.68e-8", "--freq", "915MHz"]).starts_with("2.15657 µm"));
}

#[test]
fn leaf_writes_only_where_asked() {
    let dir = scratch("leaf");
    let dxf = dir.join("pair.dxf");
    let metrics = dir.join("metrics.txt");
    let out = leafrf(&["leaf", &fixture("default_leaf.json"), "--dxf", dxf.to_str().unwrap(), "--out", metrics.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let mut names: Vec<String> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, vec!["metrics.txt", "pair.dxf"]);
    assert!(std::fs::read_to_string(&metrics).unwrap().starts_with("2 element(s)"));
    let first = std::fs::read(&dxf).unwrap();
    assert!(leafrf(&["leaf", "--dxf", dxf.to_str().unwrap()]).status.success());
    assert_eq!(std::fs::read(&dxf).unwrap(), first);
    let _ = std::fs::remove_dir_all(dir);
}

#[test]
fn every_command_is_deterministic() {
    for args in [
        vec!["match", "--load", "25-10j"],
        vec!["sweep", "--resonator", "10ohm,18nH,1.2pF", "--format", "csv"],
        vec!["snap", "--resonator", "10ohm,18nH,1.2pF", "--format", "json"],
        vec!["optimize", "--resonator", "10ohm,18nH,1.2pF", "--k", "3"],
        vec!["leaf", "--format", "csv"],
        vec!["link"],
        vec!["skin", "--format", "json"],
    ] {
        assert_eq!(stdout(&args), stdout(&args), "{args:?}");
    }
}
