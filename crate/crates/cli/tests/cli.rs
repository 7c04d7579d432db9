use std::path::Path;
use std::process::{Command, Output};

fn qes(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qes"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const GOLDEN: &[&str] = &[
    "solve", "--model", "anharmonic", "--ell", "0", "--n", "0", "--free", "omega", "--param",
    "d=0.5", "--param", "e=2",
];

#[test]
fn solve_prints_golden_record() {
    let out = qes(GOLDEN);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("\"free_value\": 4.3750000000000000e0"));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v[0]["free_value"].as_f64(), Some(4.375));
    assert_eq!(v[0]["energy"].as_f64(), Some(17.5));
    assert_eq!(v[0]["node_count"].as_u64(), Some(0));
    assert_eq!(v[0]["status"].as_str(), Some("ok"));
}

#[test]
fn verify_roundtrip_and_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("golden.csv");
    let p = path.to_str().unwrap();
    let mut args = GOLDEN.to_vec();
    args.extend(["--format", "csv", "--out", p]);
    assert_eq!(qes(&args).status.code(), Some(0));

    let ok = qes(&["verify", "--input", p]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));

    let text = std::fs::read_to_string(&path).unwrap();
    let tampered = text.replacen("1.7500000000000000e1", "1.7600000000000000e1", 1);
    assert_ne!(text, tampered);
    std::fs::write(&path, tampered).unwrap();
    let bad = qes(&["verify", "--input", p, "--verify", "bae"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stdout(&bad).contains("mismatch"));
}

#[test]
fn config_errors_exit_one() {
    for args in [
        vec!["solve", "--model", "isotonic", "--param", "omega=1"],
        vec!["solve", "--model", "nonsense"],
        vec!["solve", "--model", "isotonic", "--param", "omega"],
        vec!["scan", "--model", "isotonic", "--param", "omega=1", "--scan", "a=1:2"],
        vec!["--not-a-flag"],
        vec![],
    ] {
        let out = qes(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("job.json");
    std::fs::write(
        &cfg,
        r#"{"command": "solve", "model": "isotonic", "params": {"omega": 1}, "verify": "bae"}"#,
    )
    .unwrap();
    let out = qes(&["--config", cfg.to_str().unwrap(), "--param", "a=1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("\"free_value\": 2.0000000000000000e1"));

    std::fs::write(&cfg, "{\"command\": \"solve\",\n \"model\": 3}").unwrap();
    let bad = qes(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("line 2"));
}

#[test]
fn scan_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| {
        let path = dir.path().join(name);
        let out = qes(&[
            "scan", "--model", "isotonic", "--param", "omega=1", "--scan", "ell=0,1", "--scan",
            "a=0.5:1.5:3", "--scan", "n=0,1", "--seed", "9", "--workers", workers, "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        std::fs::read(Path::new(&path)).unwrap()
    };
    let a = run("a.json", "4");
    let b = run("b.json", "1");
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 12 + 2);
}

#[test]
fn oracle_compare_and_arbitrate() {
    let out = qes(&[
        "oracle-compare", "--model", "soft-core-coulomb", "--param", "beta=1", "--param", "G=0.5",
        "--n", "1..2", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1 + 4 + 9);
    assert_eq!(text.lines().filter(|l| l.ends_with(",true")).count(), 5);

    let arb = qes(&["arbitrate"]);
    assert_eq!(arb.status.code(), Some(0));
    assert!(stdout(&arb).contains("Supported by the finite-difference spectrum: 2(l+1)beta."));
}
