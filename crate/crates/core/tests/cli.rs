use std::path::PathBuf;
use std::process::{Command, Output};

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn minset(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minset"))
        .args(args)
        .env("MINSET_DATA_DIR", data_dir())
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn compute_shifted_totient() {
    let o = minset(&[
        "compute",
        "--set",
        "totient+3",
        "--base",
        "10",
        "--bound",
        "100000",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("{4, 5, 7, 9, 11, 13, 21, 23, 31, 33, 61, 63, 81, 83}"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn verify_three_squares_prints_evidence() {
    let o = minset(&[
        "verify",
        "--set",
        "3squares",
        "--candidate",
        "1,2,3,4,5,6,8,9,70,77",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("mode: VerifiedComplete"), "{out}");
    assert!(
        out.contains("evidence:") && out.contains("not in S"),
        "{out}"
    );
}

#[test]
fn oracle_witness() {
    let o = minset(&[
        "oracle", "--kind", "totient", "--n", "990", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["member"], "yes");
    assert_eq!(v["witness"], "x=991");
}

#[test]
fn exit_codes() {
    assert_eq!(
        minset(&["compute", "--set", "prime", "--bound", "10"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        minset(&["compute", "--set", "primes"]).status.code(),
        Some(1)
    );
    assert_eq!(
        minset(&["verify", "--set", "3squares", "--candidate", "1,7"])
            .status
            .code(),
        Some(1)
    );
    let empty = minset(&["families", "--candidate", "1,2,3,4,5,6,7,8,9"]);
    assert_eq!(empty.status.code(), Some(0));
    assert!(stdout(&empty).contains("Empty"));
    let o = minset(&[
        "verify",
        "--set",
        "totient",
        "--candidate-bound",
        "10000",
        "--family-expansions",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
}

#[test]
fn json_report_replays_to_identical_elements() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let o = minset(&[
        "compute",
        "--set",
        "qr:7 | primes",
        "--bound",
        "50000",
        "--format",
        "json",
        "--output",
        first.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let a: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&first).unwrap()).unwrap();
    assert_eq!(a["config"]["seed"], 0x5eed);
    let again = minset(&["replay", first.to_str().unwrap(), "--format", "json"]);
    assert_eq!(again.status.code(), Some(0));
    let b: serde_json::Value = serde_json::from_slice(&again.stdout).unwrap();
    assert_eq!(
        serde_json::to_string(&a["elements"]).unwrap(),
        serde_json::to_string(&b["elements"]).unwrap()
    );
    assert_eq!(a["config"], b["config"]);
}

#[test]
fn data_dir_flag_beats_environment() {
    // an empty directory has no Mersenne table
    let empty = tempfile::tempdir().unwrap();
    let o = minset(&["perfect", "--data-dir", empty.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mersenne_exponents.txt"));
    let o = minset(&["perfect", "--count", "12"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("M base 10: {6, 28}"));
}

#[test]
fn conjecture_and_experiment() {
    let o = minset(&["conjecture", "pow2", "--max-exp", "2000"]);
    assert!(stdout(&o).contains("conjecture holds up to bound"));
    let o = minset(&[
        "experiment",
        "--kind",
        "intersection",
        "--s",
        "residue:7+10N",
        "--t",
        "primes",
        "--bound",
        "10000",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("fails") && stdout(&o).contains("227"),
        "{}",
        stdout(&o)
    );
}
