#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_leurn"));
    c.env_remove("SOURCE_DATE_EPOCH").env("RUST_LOG", "error");
    c
}

/// Runs the binary and returns stdout, panicking with stderr on failure.
pub fn run_ok(args: &[&str]) -> String {
    let out = bin().args(args).output().expect("spawn leurn");
    assert!(
        out.status.success(),
        "leurn {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8 stdout")
}

pub fn run_err(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("spawn leurn");
    assert!(!out.status.success(), "leurn {args:?} unexpectedly succeeded");
    out
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf8 path")
}

/// Writes a Half Moon CSV and trains a small model on it.
pub fn toy_model(dir: &Path, extra: &[&str]) -> (PathBuf, PathBuf) {
    let data = dir.join("hm.csv");
    let model = dir.join("model.json");
    run_ok(&["toydata", "--n", "600", "--seed", "1", "--out", path_str(&data)]);
    let mut args = vec![
        "train", "--data", path_str(&data), "--target", "y", "--d", "2", "--k", "5", "--lr", "1e-2",
        "--epochs", "40", "--patience", "10", "--seed", "3", "--out", path_str(&model),
    ];
    args.extend_from_slice(extra);
    run_ok(&args);
    (data, model)
}

/// Parses CSV text into header and rows.
pub fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}
