//! End-to-end runs of the command-line driver.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn kssearch(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kssearch"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn encode_reports_family_counts() {
    let dir = tempfile::tempdir().unwrap();
    let o = kssearch(&["encode", "-n", "6", "--no-truncate", "--out", "e"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    for line in ["triangle-defs 80", "squarefree 45", "min-degree 60", "triangle-membership 6", "noncolorability 64"] {
        assert!(text.contains(line), "{text}");
    }
    assert!(dir.path().join("e/formula.cnf").exists());
    let bad = kssearch(&["encode", "-n", "3"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn pipeline_states_the_bound_and_leaves_a_verifiable_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = kssearch(&["pipeline", "-n", "10", "--cutoff", "4", "--jobs", "2", "--out", "run"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("0 candidates; no KS graph of order 10"));
    let v = kssearch(&["verify-proof", "run"], dir.path());
    assert_eq!(v.status.code(), Some(0));
    assert!(stdout(&v).contains("4/4 cube proofs accepted"));
    let manifest = fs::read_to_string(dir.path().join("run/manifest.txt")).unwrap();
    let again = kssearch(&["pipeline", "-n", "10", "--cutoff", "4", "--jobs", "1", "--out", "run2"], dir.path());
    assert!(again.status.success());
    assert_eq!(fs::read_to_string(dir.path().join("run2/manifest.txt")).unwrap(), manifest);
}

#[test]
fn tampered_proof_exits_with_verify_code() {
    let dir = tempfile::tempdir().unwrap();
    assert!(kssearch(&["solve", "-n", "9", "--out", "s"], dir.path()).status.success());
    let ok = kssearch(&["verify-proof", "s/proof.drat", "-n", "9"], dir.path());
    assert_eq!(ok.status.code(), Some(0));
    let path = dir.path().join("s/proof.drat");
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines.remove(0);
    let last = lines.len() - 1;
    lines[last] = "1 0".into();
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    let bad = kssearch(&["verify-proof", "s/proof.drat", "-n", "9"], dir.path());
    assert_eq!(bad.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("line "));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), "n=7\nmin-degree=3\nout=fromfile\n").unwrap();
    let o = kssearch(&["--config", "run.cfg", "encode", "--out", "flag"], dir.path());
    assert!(o.status.success());
    assert!(dir.path().join("flag/formula.cnf").exists());
    assert!(!dir.path().join("fromfile").exists());
    fs::write(dir.path().join("bad.cfg"), "colour=red\n").unwrap();
    assert!(!kssearch(&["--config", "bad.cfg", "encode"], dir.path()).status.success());
}

#[test]
fn graph_queries() {
    let dir = tempfile::tempdir().unwrap();
    let o = kssearch(&["colorability", "C~", "Bw"], dir.path());
    let text = stdout(&o);
    assert!(text.contains("C~ noncolorable"));
    assert!(text.contains("Bw colorable"));
    let o = kssearch(&["embed-check", "Bw", "Cr"], dir.path());
    let text = stdout(&o);
    assert!(text.contains("Bw embeddable"));
    assert!(text.contains("Cr unembeddable"));
}

#[test]
fn lower_bound_table_at_small_orders() {
    let dir = tempfile::tempdir().unwrap();
    let o = kssearch(&["reproduce-table", "2", "--max-order", "9", "--out", "t2"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("9: 0 candidates; no KS graph of order 9"));
    assert!(text.contains("minimum KS graph order ≥ 10"));
    let o = kssearch(&["reproduce-table", "3", "--max-order", "11"], dir.path());
    assert!(!o.status.success());
}

#[test]
fn candidate_log_checks() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("empty.txt"), "").unwrap();
    let o = kssearch(&["verify-candidates", "empty.txt", "-n", "12"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("no KS graph of order 12"));
    // the triangular prism is 010-colorable, so the log is rejected
    fs::write(dir.path().join("bad.txt"), "E{Sw\n").unwrap();
    let o = kssearch(&["verify-candidates", "bad.txt", "-n", "6"], dir.path());
    assert_eq!(o.status.code(), Some(4));
}
