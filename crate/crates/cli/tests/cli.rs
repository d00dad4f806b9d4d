use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cyclic-cnt"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn num(v: &Value, pointer: &str) -> f64 {
    v.pointer(pointer).and_then(Value::as_f64).unwrap_or_else(|| panic!("{pointer} missing in {v}"))
}

/// Compares with `tests/golden/<name>`, rewriting it when UPDATE_GOLDEN is set.
fn check_golden(name: &str, actual: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "{name} drifted from its golden file");
}

#[test]
fn pr_box_analysis() {
    let path = fixture("pr_box.toml");
    let out = run(&["analyze", path.to_str().unwrap()]);
    let v = stdout_json(&out);
    assert_eq!(v["closed_form"]["contextual"], true);
    assert!((num(&v, "/closed_form/cnt") - 2.0).abs() < 1e-12);
    assert!((num(&v, "/closed_form/cnt0") - 2.0).abs() < 1e-12);
    assert!(v["closed_form"]["ncnt"].is_null());
    for key in ["cnt1", "cnt2", "cnt0"] {
        assert!(num(&v, &format!("/agreement/{key}")) < 1e-7, "{key}");
    }
    assert_eq!(v["agreement"]["within_tolerance"], true);
    check_golden("pr_box.json", &String::from_utf8(out.stdout).unwrap());
}

#[test]
fn probability_units_divide_by_four() {
    let path = fixture("pr_box.toml");
    for lp in ["float", "exact"] {
        let v = stdout_json(&run(&["analyze", path.to_str().unwrap(), "--units", "p", "--lp", lp]));
        assert_eq!(v["lp_mode"], lp);
        assert!((num(&v, "/closed_form/cnt") - 0.5).abs() < 1e-12);
        assert!((num(&v, "/lp/cnt2") - 0.5).abs() < 1e-7);
        assert_eq!(v["closed_form"]["s1_b"], 4.0, "criterion quantities are not rescaled");
    }
}

#[test]
fn independent_coins_have_unit_noncontextuality() {
    let path = fixture("uniform5.toml");
    let v = stdout_json(&run(&["analyze", path.to_str().unwrap(), "--seed", "3"]));
    assert_eq!(v["closed_form"]["contextual"], false);
    assert!((num(&v, "/closed_form/ncnt") - 1.0).abs() < 1e-12);
    assert!((num(&v, "/closed_form/m_value") - 1.0).abs() < 1e-12);
    assert!(num(&v, "/agreement/ncnt2") < 1e-7);
    assert_eq!(v["provenance"]["seed"], 3);
}

#[test]
fn provenance_hashes_the_input() {
    let path = fixture("pr_box.toml");
    let v = stdout_json(&run(&["analyze", path.to_str().unwrap()]));
    let hash = v["provenance"]["input_sha256"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    assert!(hash.chars().all(|c| c.is_ascii_hexdigit()));
    assert_eq!(num(&v, "/provenance/tolerances/oracle"), 1e-7);
}

#[test]
fn general_spec() {
    let path = fixture("square.toml");
    let v = stdout_json(&run(&["analyze", path.to_str().unwrap()]));
    assert_eq!(v["kind"], "general");
    assert_eq!(v["contextual"], true);
    assert!((num(&v, "/cnt1") - 2.0).abs() < 1e-7);
    assert!((num(&v, "/cnt2") - 2.0).abs() < 1e-7);
    assert_eq!(v["cyclic_subsystems"], 1);
    assert_eq!(v["contextual_cyclic_subsystems"], 1);
}

#[test]
fn malformed_input_exits_2() {
    for name in ["malformed.toml", "unknown_field.toml"] {
        let out = run(&["analyze", fixture(name).to_str().unwrap()]);
        assert_eq!(code(&out), 2, "{name}");
        assert!(out.stdout.is_empty());
    }
    assert_eq!(code(&run(&["analyze"])), 2);
    assert_eq!(code(&run(&["sweep", "--rank", "3", "--mode", "sideways"])), 2);
}

#[test]
fn invalid_systems_exit_3() {
    for name in ["frechet.toml", "rank_mismatch.toml"] {
        let out = run(&["analyze", fixture(name).to_str().unwrap()]);
        assert_eq!(code(&out), 3, "{name}");
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(code(&run(&["sweep", "--rank", "8", "--mode", "consistent"])), 3);
    assert_eq!(code(&run(&["sweep", "--rank", "3", "--mode", "consistent", "--steps", "1"])), 3);
}

#[test]
fn missing_file_exits_1() {
    assert_eq!(code(&run(&["analyze", "/nonexistent/system.toml"])), 1);
}

#[test]
fn ingest_estimates_from_counts() {
    let path = fixture("counts.csv");
    let v = stdout_json(&run(&["ingest", path.to_str().unwrap()]));
    assert_eq!(v["closed_form"]["rank"], 3);
    // contexts 1 and 2 correlated (0.8, 0.68), context 3 anticorrelated (-0.6)
    assert!((num(&v, "/closed_form/s1_b") - 2.08).abs() < 1e-12);
    assert!((num(&v, "/closed_form/cnt") - 1.08).abs() < 1e-12);
    assert_eq!(v["agreement"]["within_tolerance"], true);
}

#[test]
fn ingest_rejects_bad_counts() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "context_id,c00,c01,c10,c11\n1,0,0,0,0\n2,1,1,1,1\n").unwrap();
    assert_eq!(code(&run(&["ingest", empty.to_str().unwrap()])), 3);
    let header = dir.path().join("header.csv");
    std::fs::write(&header, "id,a,b\n1,2,3\n").unwrap();
    assert_eq!(code(&run(&["ingest", header.to_str().unwrap()])), 2);
}

#[test]
fn sweep_matches_golden_and_is_deterministic() {
    let args = ["sweep", "--rank", "4", "--mode", "consistent"];
    let first = run(&args);
    assert!(first.status.success());
    let text = String::from_utf8(first.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("t,s1,Delta,m,signed_measure"));
    assert_eq!(text.lines().count(), 102);
    assert_eq!(run(&args).stdout, text.as_bytes());
    check_golden("sweep_rank4_consistent.csv", &text);
}

#[test]
fn sweep_writes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let out = run(&["sweep", "--rank", "3", "--mode", "inconsistent", "--steps", "11", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 12);
}

#[test]
fn lemmas_pass_at_default_seed() {
    let v = stdout_json(&run(&["lemmas"]));
    assert_eq!(v["seed"], 1);
    let suites = v["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 10);
    for s in suites {
        assert_eq!(s["failed"], 0, "{s}");
        assert_eq!(s["passed"], 200, "{s}");
    }
}

#[test]
fn corrupted_suite_exits_5() {
    let out = run(&["lemmas", "--draws", "5", "--corrupt", "pocket_count"]);
    assert_eq!(code(&out), 5);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let bad: Vec<&Value> = v["suites"].as_array().unwrap().iter().filter(|s| s["failed"] != 0).collect();
    assert_eq!(bad.len(), 1);
    assert_eq!(bad[0]["suite"], "pocket_count");
}

#[test]
fn zero_draws_pass_trivially() {
    let out = run(&["lemmas", "--draws", "0"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn too_few_scan_samples() {
    let out = run(&["counterexamples", "--samples", "10"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("at least 50"));
}

#[test]
fn counterexamples_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("scan.csv");
    let v = stdout_json(&run(&["counterexamples", "--samples", "60", "--csv", csv.to_str().unwrap()]));
    assert_eq!(v["summary"], "contextual: yes; cyclic subsystems contextual: 0/7");
    assert_eq!(v["tripartite"]["contextual_cyclic_subsystems"], 0);
    let scan = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(scan.lines().next(), Some("index,contextual,cnt1,cnt2"));
    assert_eq!(scan.lines().count(), 61);
    for key in ["equal_cnt1_pair", "equal_cnt2_pair"] {
        assert!(num(&v, &format!("/{key}/difference")) > 1e-3, "{key}");
    }
}

fn sweep_rows(args: &[&str]) -> Vec<Vec<f64>> {
    let out = run(args);
    assert!(out.status.success());
    String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn sweep_landmarks() {
    // rank 4: the contextual end is the PR-box corner, s1 - Delta = 4 - 2
    let rows = sweep_rows(&["sweep", "--rank", "4", "--mode", "consistent"]);
    assert!((rows[0][4] - 2.0).abs() < 1e-12);
    // rank 3: at the centre e_b = 0, so -min(Delta - 0, m) = -min(1, 1)
    let rows = sweep_rows(&["sweep", "--rank", "3", "--mode", "consistent"]);
    let mid = &rows[50];
    assert!((mid[0] - 0.5).abs() < 1e-12);
    assert!((mid[4] + 1.0).abs() < 1e-12);
}
