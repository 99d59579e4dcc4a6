use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cmawm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmawm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_dir(dir: &Path, extra: &[&str]) -> Output {
    let out = dir.to_str().unwrap();
    let mut args = vec!["run", "--out", out];
    args.extend_from_slice(extra);
    cmawm(&args)
}

#[test]
fn run_writes_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let res = run_dir(
        &dir,
        &[
            "--algo",
            "elitist-wm",
            "--problem",
            "one-max",
            "--dim",
            "10",
            "--trials",
            "3",
            "--trace",
        ],
    );
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    for f in ["trials.csv", "summary.csv", "plot.csv", "meta.json"] {
        assert!(dir.join(f).is_file(), "missing {f}");
    }
    let trials = fs::read_to_string(dir.join("trials.csv")).unwrap();
    let mut lines = trials.lines();
    assert_eq!(
        lines.next().unwrap(),
        "algo,problem,dim,trial,seed,success,evaluations,best_f,reason"
    );
    assert_eq!(lines.count(), 3);
    assert_eq!(fs::read_dir(dir.join("traces")).unwrap().count(), 3);
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["cells"][0]["problem"], "one-max");
}

#[test]
fn same_seed_same_trials() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "--algo",
        "cma-wm",
        "--problem",
        "sphere-int",
        "--dim",
        "6",
        "--trials",
        "2",
        "--seed",
        "5",
    ];
    for name in ["a", "b"] {
        assert!(run_dir(&tmp.path().join(name), &args).status.success());
    }
    let a = fs::read(tmp.path().join("a/trials.csv")).unwrap();
    let b = fs::read(tmp.path().join("b/trials.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn config_file_with_override_and_summarize() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(
        &cfg,
        r#"
        algo = ["ea", "cga"]
        problem = "one-max"
        dim = 8
        trials = 4
        "#,
    )
    .unwrap();
    let dir = tmp.path().join("run");
    let res = run_dir(&dir, &["--config", cfg.to_str().unwrap(), "--trials", "2"]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let trials = fs::read_to_string(dir.join("trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 1 + 2 * 2);

    let summary = tmp.path().join("summary.csv");
    let plot = tmp.path().join("plot.csv");
    let res = cmawm(&[
        "summarize",
        "--in",
        dir.to_str().unwrap(),
        "--out",
        summary.to_str().unwrap(),
        "--plot",
        plot.to_str().unwrap(),
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    assert_eq!(
        fs::read_to_string(&summary).unwrap(),
        fs::read_to_string(dir.join("summary.csv")).unwrap()
    );
    assert!(plot.is_file());
}

#[test]
fn invalid_input_fails_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let cases: [&[&str]; 3] = [
        &["--algo", "cga", "--problem", "sphere-int", "--dim", "10"],
        &[
            "--algo",
            "ea",
            "--problem",
            "one-max",
            "--dim",
            "10",
            "--budget-mult",
            "0",
        ],
        &[
            "--algo",
            "ea",
            "--problem",
            "no-such-problem",
            "--dim",
            "10",
        ],
    ];
    for args in cases {
        let res = run_dir(&dir, args);
        assert!(!res.status.success());
        assert!(String::from_utf8_lossy(&res.stderr).starts_with("error:"));
    }
    assert!(!dir.exists());
}
