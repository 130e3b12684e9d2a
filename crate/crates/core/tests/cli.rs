//! Drives the built binary end to end.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_margin-tensor"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn digest(path: PathBuf) -> Vec<u8> {
    Sha256::digest(std::fs::read(path).unwrap()).to_vec()
}

const SYNTH: &[&str] = &[
    "synth",
    "--classes",
    "3",
    "--per-class",
    "4",
    "--dims",
    "4,3",
    "--subdims",
    "2,2",
    "--noise",
    "0.05",
    "--seed",
    "1",
];
const QUICK: &[&str] = &["--k1", "2", "--k2", "3", "--outer-max", "2"];

fn synth(dir: &Path, name: &str) {
    let mut args = SYNTH.to_vec();
    args.extend(["--out", name]);
    ok(dir, &args);
}

fn train(dir: &Path, data: &str, out: &str, extra: &[&str]) -> String {
    let mut args = vec!["train", "--data", data, "--out", out];
    args.extend(QUICK);
    args.extend(extra);
    ok(dir, &args)
}

#[test]
fn synth_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    synth(tmp.path(), "a.tds");
    synth(tmp.path(), "b.tds");
    assert_eq!(digest(tmp.path().join("a.tds")), digest(tmp.path().join("b.tds")));
    let mut args = SYNTH.to_vec();
    *args.last_mut().unwrap() = "2";
    args.extend(["--out", "c.tds"]);
    ok(tmp.path(), &args);
    assert_ne!(digest(tmp.path().join("a.tds")), digest(tmp.path().join("c.tds")));
}

#[test]
fn train_writes_identical_models() {
    let tmp = TempDir::new().unwrap();
    synth(tmp.path(), "d.tds");
    let out = train(tmp.path(), "d.tds", "a.lmm", &[]);
    train(tmp.path(), "d.tds", "b.lmm", &[]);
    assert_eq!(digest(tmp.path().join("a.lmm")), digest(tmp.path().join("b.lmm")));
    let bytes = std::fs::read(tmp.path().join("a.lmm")).unwrap();
    assert_eq!(&bytes[..4], b"LMM1");
    assert!(out.lines().any(|l| l == "seed=42"), "{out}");
    assert!(out.lines().any(|l| l.starts_with("ranks=")), "{out}");
    assert!(out.lines().any(|l| l.starts_with("final_objective=")), "{out}");
}

#[test]
fn usage_and_validation_errors_exit_2() {
    let tmp = TempDir::new().unwrap();
    synth(tmp.path(), "d.tds");
    let cases: &[&[&str]] = &[
        &["train", "--out", "m.lmm"],
        &["train", "--data", "d.tds", "--out", "m.lmm", "--lambda", "-1"],
        &["train", "--data", "d.tds", "--out", "m.lmm", "--mu-decay", "1.5"],
        &["xval", "--data", "d.tds", "--folds", "1"],
        &["gabor", "--data", "d.tds", "--out", "g.tds", "--ksize", "4"],
        &["synth", "--out", "s.tds", "--classes", "2", "--per-class", "2", "--dims", "3", "--subdims", "4"],
        &["eval", "--data", "d.tds"],
        &["bogus"],
    ];
    for args in cases {
        assert_eq!(run(tmp.path(), args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn runtime_errors_exit_1() {
    let tmp = TempDir::new().unwrap();
    std::fs::write(tmp.path().join("junk.tds"), b"XXXX").unwrap();
    assert_eq!(run(tmp.path(), &["train", "--data", "missing.tds", "--out", "m"]).status.code(), Some(1));
    assert_eq!(run(tmp.path(), &["train", "--data", "junk.tds", "--out", "m"]).status.code(), Some(1));
}

#[test]
fn predict_eval_and_transform_compose() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    synth(dir, "d.tds");
    train(dir, "d.tds", "m.lmm", &[]);

    let csv = ok(dir, &["predict", "--model", "m.lmm", "--data", "d.tds"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("index,label"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 12);
    assert_eq!(rows[0].split(',').next(), Some("0"));

    // Test set equal to the training set: every point finds itself.
    let direct = ok(dir, &["eval", "--model", "m.lmm", "--data", "d.tds"]);
    assert_eq!(direct.trim(), "1.000000");

    ok(dir, &["transform", "--model", "m.lmm", "--data", "d.tds", "--out", "e.tds"]);
    let split = ok(dir, &["eval", "--train", "e.tds", "--data", "e.tds"]);
    assert_eq!(split, direct);
}

#[test]
fn xval_reports_folds_and_summary() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    ok(
        dir,
        &[
            "synth",
            "--classes",
            "2",
            "--per-class",
            "2",
            "--dims",
            "3",
            "--subdims",
            "1",
            "--noise",
            "0.01",
            "--out",
            "tiny.tds",
        ],
    );
    let mut args =
        vec!["xval", "--data", "tiny.tds", "--folds", "2", "--k1", "1", "--k2", "1", "--outer-max", "1"];
    args.extend(["--seed", "5"]);
    let out = ok(dir, &args);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3, "{out}");
    assert!(lines[0].starts_with("fold=0 accuracy="));
    assert!(lines[2].starts_with("lambda=0.1 mean="));
    assert!(lines[2].ends_with("seed=5"));
}

#[test]
fn lambda_sweep_gives_one_line_each() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    ok(
        dir,
        &[
            "synth",
            "--classes",
            "2",
            "--per-class",
            "3",
            "--dims",
            "3",
            "--subdims",
            "1",
            "--noise",
            "0.01",
            "--out",
            "s.tds",
        ],
    );
    let mut summaries = Vec::new();
    for lambda in ["0.001", "0.01", "0.1", "1", "10"] {
        let out = ok(
            dir,
            &[
                "xval",
                "--data",
                "s.tds",
                "--folds",
                "3",
                "--k1",
                "1",
                "--k2",
                "2",
                "--outer-max",
                "1",
                "--lambda",
                lambda,
            ],
        );
        let last = out.lines().last().unwrap().to_string();
        let fields: Vec<(&str, &str)> = last.split(' ').map(|kv| kv.split_once('=').unwrap()).collect();
        assert_eq!(fields[0], ("lambda", lambda));
        assert_eq!(fields[1].0, "mean");
        assert_eq!(fields[2].0, "std");
        summaries.push(last);
    }
    assert_eq!(summaries.len(), 5);
}

#[test]
fn gabor_lifts_to_28_channels() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    ok(
        dir,
        &[
            "synth",
            "--classes",
            "2",
            "--per-class",
            "1",
            "--dims",
            "32,32",
            "--subdims",
            "2,2",
            "--out",
            "img.tds",
        ],
    );
    let out = ok(dir, &["gabor", "--data", "img.tds", "--out", "lifted.tds"]);
    assert_eq!(out.trim(), "dims=32,32,28");
    let small = ok(
        dir,
        &["gabor", "--data", "img.tds", "--out", "l2.tds", "--scales", "2", "--orients", "3", "--ksize", "5"],
    );
    assert_eq!(small.trim(), "dims=32,32,6");
    // A lifted (order-3) dataset cannot be lifted again.
    assert_eq!(run(dir, &["gabor", "--data", "lifted.tds", "--out", "x.tds"]).status.code(), Some(2));
}
