use std::fs;
use std::process::{Command, Output};

fn aqmsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aqmsim")).args(args).output().unwrap()
}

#[test]
fn preset_list_names_baseline() {
    let out = aqmsim(&["preset", "list"]);
    assert!(out.status.success());
    let names = String::from_utf8(out.stdout).unwrap();
    assert!(names.lines().any(|l| l == "baseline"));
    assert!(names.lines().any(|l| l == "fig4-sweep-choke"));
}

#[test]
fn emitted_config_runs_and_writes_csvs() {
    let out = aqmsim(&["preset", "baseline", "--emit-config"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("discipline = red"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("baseline.conf");
    fs::write(&cfg, text).unwrap();
    let csv_dir = dir.path().join("out");
    let out = aqmsim(&[
        "run",
        cfg.to_str().unwrap(),
        "--duration",
        "5",
        "--out-dir",
        csv_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("utilization"));
    for name in ["flows.csv", "queue.csv", "summary.csv"] {
        let body = fs::read_to_string(csv_dir.join(name)).unwrap();
        assert!(body.lines().count() > 1, "{name}");
    }
}

#[test]
fn sweep_prints_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.conf");
    fs::write(
        &cfg,
        "run.duration_s = 3\nsweep.param = udp.rate_bps\nsweep.values = 1000000, 4000000\n",
    )
    .unwrap();
    let out = aqmsim(&["sweep", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 3);
}

#[test]
fn unknown_preset_fails() {
    let out = aqmsim(&["preset", "no-such-preset"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no-such-preset"));
}

#[test]
fn invalid_config_reports_every_issue() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    fs::write(&cfg, "discipline = red\ndiscipline.red.min_th = 20\ndiscipline.red.max_th = 10\nbogus = 1\n").unwrap();
    let out = aqmsim(&["run", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bogus"), "{err}");
    assert!(err.contains("min_th"), "{err}");
}
