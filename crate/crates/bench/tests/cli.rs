use std::process::Command;

use feigh_bench::read_records;

fn bench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bench"))
}

#[test]
fn run_then_fit() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("results.csv");
    let status = bench()
        .args([
            "run",
            "--m-grid",
            "64:512:x2",
            "--repeats",
            "3",
            "--algorithms",
            "feigh,svd,dense",
        ])
        .args(["--dense-max-m", "128", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());

    let records = read_records(std::fs::File::open(&out).unwrap()).unwrap();
    // feigh and svd at 4 sizes, dense at 2.
    assert_eq!(records.len(), (4 + 4 + 2) * 3);
    assert!(dir.path().join("results.summary.csv").exists());
    assert!(dir.path().join("results.errors.csv").exists());

    let fit = bench().args(["fit", "--in"]).arg(&out).output().unwrap();
    assert!(fit.status.success());
    let text = String::from_utf8(fit.stdout).unwrap();
    assert!(text.contains("feigh slope="), "{text}");
}

#[test]
fn demo_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let status = bench()
        .args([
            "demo-learner",
            "--m",
            "32",
            "--rank-cap",
            "4",
            "--iters",
            "3",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(report["iterations"].as_array().unwrap().len(), 3);
}

#[test]
fn config_errors_exit_nonzero() {
    for args in [
        vec!["run", "--m-grid", "banana"],
        vec!["run", "--algorithms", "qr"],
        vec!["demo-learner", "--rank-cap", "500"],
        vec!["fit", "--in", "/nonexistent/results.csv"],
    ] {
        let out = bench().args(&args).output().unwrap();
        assert!(!out.status.success(), "{args:?} succeeded");
        assert!(!out.stderr.is_empty());
    }
}
