use std::path::Path;
use std::process::{Command, Output};

fn kenn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kenn")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_pacf_and_forecast() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let out = kenn(&["generate", "--out", path(&csv), "--n", "960"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let out = kenn(&["pacf", "--input", path(&csv), "--max-lag", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("lag,value"));
    assert_eq!(text.lines().count(), 6);

    let edges = dir.path().join("edges.csv");
    let out = kenn(&["kds", "forecast", "--input", path(&csv), "--dump-graph", path(&edges)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("index,truth,forecast"));
    assert!(edges.exists());

    let out = kenn(&["kds", "forecast", "--input", path(&csv), "--kind", "naive", "--dump-graph", path(&edges)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn train_commands_report_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    assert!(kenn(&["generate", "--out", path(&csv), "--n", "960"]).status.success());
    let ckpt = dir.path().join("m.ckpt");

    let out = kenn(&["train", "--input", path(&csv), "--epochs", "3", "--out", path(&ckpt)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stdout).unwrap().contains("DNN,"));
    assert!(ckpt.exists());

    let out = kenn(&["kenn", "train", "--input", path(&csv), "--epochs", "3", "--kind", "sar"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    for model in ["DNN,", "KDS,", "KENN,"] {
        assert!(text.contains(model), "{text}");
    }
}

#[test]
fn suite_run_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("suite.toml");
    std::fs::write(
        &cfg,
        "name = \"tiny\"\n[defaults]\nseeds = [1]\ntrain = { max_epochs = 2 }\n\
         data = { source = \"synthetic\", n = 960 }\n[[case]]\nlabel = \"a\"\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = kenn(&["suite", "run", "--config", path(&cfg), "--out", path(&out_dir)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let results = out_dir.join("results.csv");
    assert!(results.exists());

    let out = kenn(&["report", "--results", path(&results)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("KENN"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.toml");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(kenn(&["suite", "run", "--config", path(&empty)]).status.code(), Some(1));
    assert_eq!(kenn(&["pacf"]).status.code(), Some(1));
    assert_eq!(kenn(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(kenn(&["--help"]).status.code(), Some(0));

    let missing = dir.path().join("missing.csv");
    assert_eq!(kenn(&["pacf", "--input", path(&missing), "--max-lag", "3"]).status.code(), Some(2));
}
