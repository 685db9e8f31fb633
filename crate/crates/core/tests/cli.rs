//! End-to-end tests of the `triage` binary: the full pipeline on a small
//! synthetic task, byte-identical reruns, config-file handling, and the
//! zero-ceiling DT warning.

use std::path::Path;
use std::process::{Command, Output};

fn triage(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_triage"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = triage(dir, args);
    assert!(
        out.status.success(),
        "`triage {}` failed:\n{}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|_| panic!("missing {name}"))
}

#[test]
fn full_pipeline_and_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    let stdout = ok(dir, &["gen-data", "--n", "600", "--seed", "3"]);
    assert!(stdout.contains("dataset.csv"));
    ok(dir, &["split", "--seed", "3"]);
    ok(dir, &["train-ensemble", "--members", "4", "--epochs", "4"]);
    ok(dir, &[
        "featurize", "--data", "train.csv",
        "--preds-out", "preds_train.csv", "--features-out", "features_train.csv",
    ]);
    ok(dir, &[
        "featurize", "--data", "test.csv",
        "--preds-out", "preds_test.csv", "--features-out", "features_test.csv",
    ]);
    ok(dir, &["sweep-ldu", "--alphas", "0.8,1.0", "--epochs", "3"]);
    ok(dir, &["sweep-ld", "--alphas", "0.8,1.0", "--epochs", "3"]);
    ok(dir, &["sweep-dt", "--taus", "0.5,0.0"]);
    ok(dir, &["report", "--curve", "curve_ldu.csv", "--out", "curve_ldu.svg", "--baseline-f1", "0.9"]);

    let svg = read(dir, "curve_ldu.svg");
    assert!(svg.starts_with("<svg") && svg.contains("polyline"));
    for name in ["curve_ldu.csv", "curve_ld.csv", "curve_dt.csv"] {
        let text = read(dir, name);
        assert!(text.starts_with("param,defer_rate,f1,f1_overall,accuracy,sensitivity,specificity\n"));
    }

    // rerunning a stage overwrites its outputs with identical bytes
    let first = read(dir, "curve_ldu.csv");
    ok(dir, &["sweep-ldu", "--alphas", "0.8,1.0", "--epochs", "3"]);
    assert_eq!(first, read(dir, "curve_ldu.csv"));

    let dataset = read(dir, "dataset.csv");
    ok(dir, &["gen-data", "--n", "600", "--seed", "3"]);
    assert_eq!(dataset, read(dir, "dataset.csv"));
}

#[test]
fn config_file_flags_and_env_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::write(
        dir.join("run.conf"),
        "# synthetic task\nn = 100\nd = 3\nseed = 11\ndataset = from_config.csv\n",
    )
    .unwrap();

    ok(dir, &["--config", "run.conf", "gen-data"]);
    let from_config = read(dir, "from_config.csv");
    assert_eq!(from_config.lines().count(), 101);
    assert!(from_config.starts_with("id,label,f0,f1,f2\n"));

    // flags override the config file
    ok(dir, &["--config", "run.conf", "gen-data", "--out", "flag.csv", "--n", "50"]);
    assert_eq!(read(dir, "flag.csv").lines().count(), 51);

    // TRIAGE_SEED overrides the config seed
    let out = Command::new(env!("CARGO_BIN_EXE_triage"))
        .current_dir(dir)
        .env("TRIAGE_SEED", "99")
        .args(["--config", "run.conf", "gen-data", "--out", "env.csv"])
        .output()
        .unwrap();
    assert!(out.status.success());
    ok(dir, &["gen-data", "--n", "100", "--d", "3", "--seed", "99", "--out", "seed99.csv"]);
    assert_eq!(read(dir, "env.csv"), read(dir, "seed99.csv"));
    assert_ne!(read(dir, "env.csv"), from_config);
}

#[test]
fn dt_zero_ceiling_warning() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    // all rows vote-unanimous: u_d = 0 everywhere
    let mut preds = String::from("id,label,p0,p1\n");
    for i in 0..20 {
        let (label, p) = if i % 2 == 0 { (1, 0.9) } else { (0, 0.1) };
        preds.push_str(&format!("{i},{label},{p:.9},{p:.9}\n"));
    }
    std::fs::write(dir.join("preds_test.csv"), preds).unwrap();

    let out = triage(dir, &["sweep-dt", "--taus", "0.5,0.2,0.0"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("DT ceiling is zero"));
    let curve = read(dir, "curve_dt.csv");
    for line in curve.lines().skip(1) {
        let defer_rate: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(defer_rate, 0.0);
    }
}

#[test]
fn errors_exit_nonzero_with_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    // missing input file
    let out = triage(dir, &["split", "--input", "nope.csv"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    // malformed dataset: line-numbered parse error
    std::fs::write(dir.join("bad.csv"), "id,label,f0\n1,5,0.2\n").unwrap();
    let out = triage(dir, &["split", "--input", "bad.csv"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    // unknown subcommand
    let out = triage(dir, &["frobnicate"]);
    assert!(!out.status.success());

    // bad config line
    std::fs::write(dir.join("bad.conf"), "just a line without equals\n").unwrap();
    let out = triage(dir, &["--config", "bad.conf", "gen-data"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("key = value"));
}
