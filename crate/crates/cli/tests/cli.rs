use std::process::Command;

fn dcsi() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dcsi"))
}

#[test]
fn preset_run_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dcsi()
        .args(["--preset", "fig_rate_vs_snr", "--trials", "3", "--seed", "7", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("decaying_wyner"));
    let csv = std::fs::read_to_string(dir.path().join("fig_rate_vs_snr.csv")).unwrap();
    assert_eq!(csv.lines().count(), 41);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",3,7")));
}

#[test]
fn config_file_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small run\nmodel=expdecay\nK=6\nmu=0.6\nsnr_db=10:10:30\npolicies=perfect,decaying,uniform\ntrials=5\n").unwrap();
    let out = dcsi().arg("--config").arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 3);
    assert!(csv.contains("decaying_exp,expdecay,6,"));
}

#[test]
fn invalid_config_fails_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "K=5\nmu=1.5\n").unwrap();
    let out = dcsi().arg("--config").arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("mu must lie in (0,1]"));

    std::fs::write(&cfg, "K=5\nbogus=1\n").unwrap();
    let out = dcsi().arg("--config").arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let out = dcsi().args(["--preset", "nope"]).output().unwrap();
    assert!(!out.status.success());
    let out = dcsi().args(["--trials", "0"]).output().unwrap();
    assert!(!out.status.success());
}
