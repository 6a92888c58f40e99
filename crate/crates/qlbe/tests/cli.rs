use std::path::Path;
use std::process::{Command, Output};

use qlbe::output::parse_csv;
use serde_json::Value;

fn qlbe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qlbe")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

const THERMALIZE: &str = "schema = 1\nexperiment = thermalize\nseed = 9\nn_traj = 64\nn_samples = 5\nt_max = 2\n";

#[test]
fn run_writes_csv_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.cfg", THERMALIZE);
    let out = dir.path().join("out");
    let o = qlbe(&["thermalize", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let csv = std::fs::read_to_string(out.join("thermalize.csv")).unwrap();
    let table = parse_csv(&csv).unwrap();
    assert_eq!(table.columns[0].0, "t");
    assert_eq!(table.rows.len(), 5);
    assert_eq!(table.column("mean_u_sq").unwrap()[0], 16.0);
    let digest = csv
        .lines()
        .find_map(|l| l.strip_prefix("# metadata_sha256: "))
        .expect("digest line");

    let meta: Value = serde_json::from_str(&std::fs::read_to_string(out.join("thermalize.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 9);
    assert_eq!(meta["experiment"], "thermalize");
    assert!(meta["runtime_seconds"].as_f64().unwrap() >= 0.0);
    assert_eq!(meta["metadata_sha256"], digest);
}

#[test]
fn thread_count_and_reruns_leave_bytes_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.cfg", THERMALIZE);
    let mut files = Vec::new();
    for (i, threads) in ["1", "3", "1"].iter().enumerate() {
        let out = dir.path().join(format!("run{i}"));
        let o = qlbe(&["thermalize", "--config", &cfg, "--threads", threads, "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
        files.push(std::fs::read(out.join("thermalize.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(files[0], files[2]);
}

#[test]
fn seed_flag_overrides_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.cfg", THERMALIZE);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(qlbe(&["thermalize", "--config", &cfg, "--out", a.to_str().unwrap()]).status.success());
    assert!(qlbe(&["thermalize", "--config", &cfg, "--seed", "10", "--out", b.to_str().unwrap()]).status.success());
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(b.join("thermalize.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 10);
    assert_ne!(
        std::fs::read(a.join("thermalize.csv")).unwrap(),
        std::fs::read(b.join("thermalize.csv")).unwrap()
    );
}

#[test]
fn invalid_configuration_exits_with_structured_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.cfg",
        "schema = 1\nexperiment = thermalize\nseed = 1\nmass_ratio = -2\nn_traj = 1\n",
    );
    let o = qlbe(&["thermalize", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let record: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(record["status"], "error");
    assert_eq!(record["kind"], "config");
    let messages = record["messages"].as_array().unwrap();
    assert_eq!(messages.len(), 2);
    assert!(messages.iter().any(|m| m.as_str().unwrap().contains("mass_ratio")));
    assert!(!dir.path().join("thermalize.csv").exists());
}

#[test]
fn subcommand_must_match_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.cfg", THERMALIZE);
    let o = qlbe(&["refraction", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("thermalize"));
}

#[test]
fn missing_file_is_an_io_error() {
    let o = qlbe(&["visibility", "--config", "/nonexistent/none.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    let record: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(record["kind"], "io");
}
