use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fmfix::cli::{parse_trace_line, TRACE_HEADER};
use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn fmfix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fmfix"))
        .args(args)
        .output()
        .unwrap()
}

fn run_config(command: &str, config: &Path, extra: &[&str]) -> (i32, Value) {
    let mut args = vec![command, "--config", config.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = fmfix(&args);
    let report = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), report)
}

#[test]
fn solve_flagship_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.tsv");
    let (code, report) = run_config(
        "solve",
        &configs().join("flagship.json"),
        &["--trace", trace.to_str().unwrap()],
    );
    assert_eq!(code, 0);
    assert_eq!(report["verdict"], "pass");
    let z = report["details"]["point"].as_f64().unwrap();
    assert!((z - 2.0 / 3.0).abs() <= 1e-6);

    let text = std::fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(TRACE_HEADER));
    let records: Vec<_> = lines
        .map(|l| parse_trace_line(l).unwrap().unwrap())
        .collect();
    assert_eq!(
        records.len() as u64,
        report["details"]["iterations"].as_u64().unwrap()
    );
    assert!(records.iter().enumerate().all(|(i, r)| r.index == i + 1));
}

#[test]
fn hicks_half_is_a_verified_failure() {
    let (code, report) = run_config(
        "check-contraction",
        &configs().join("hicks_half.json"),
        &["--samples", "300"],
    );
    assert_eq!(code, 1);
    assert_eq!(report["verdict"], "fail");
    let ces = report["details"]["single_valued"]["counterexamples"]
        .as_array()
        .unwrap();
    assert!(!ces.is_empty());
}

#[test]
fn threshold_prints_golden_section() {
    let (code, report) = run_config("threshold", &configs().join("threshold.json"), &[]);
    assert_eq!(code, 0);
    let tau = report["details"]["tau"].as_f64().unwrap();
    assert!((tau - 0.618034).abs() < 1e-6);
}

#[test]
fn every_command_succeeds_on_its_sample() {
    for (cmd, cfg) in [
        ("check-axioms", "flagship.json"),
        ("check-axioms", "permutation.json"),
        ("check-phi", "flagship.json"),
        ("check-contraction", "flagship.json"),
        ("check-contraction", "setvalued.json"),
        ("solve-set", "setvalued.json"),
        ("induce-phi", "induce.json"),
    ] {
        let (code, report) = run_config(cmd, &configs().join(cfg), &["--samples", "500"]);
        assert_eq!(code, 0, "{cmd} {cfg}: {report}");
        assert_eq!(report["command"], cmd);
        assert_eq!(report["samples"], 500);
    }
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    };
    let flagship = std::fs::read_to_string(configs().join("flagship.json")).unwrap();

    let bad_t0 = write("t0.json", &flagship.replace(r#""t0": 2"#, r#""t0": 0.5"#));
    let out = fmfix(&["solve", "--config", bad_t0.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("t0 must exceed 1"));

    let bad_g = write(
        "g.json",
        &flagship.replace(r#""a": -1, "b": 1"#, r#""a": 0, "b": 1"#),
    );
    let out = fmfix(&["solve", "--config", bad_g.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("g not bijective"));

    let broken = write("broken.json", "{\"space\": }");
    let out = fmfix(&["solve", "--config", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    let missing = write("missing.json", r#"{"threshold": {"d": 1}}"#);
    assert_eq!(
        fmfix(&["solve", "--config", missing.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        fmfix(&["solve", "--config", "/nonexistent.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(fmfix(&["solve"]).status.code(), Some(2));
}

#[test]
fn max_iter_flag_limits_the_solver() {
    let (code, report) = run_config(
        "solve",
        &configs().join("flagship.json"),
        &["--max-iter", "3"],
    );
    assert_eq!(code, 1);
    assert_eq!(report["details"]["converged"], false);
    assert_eq!(report["details"]["iterations"], 3);
}

#[test]
fn timings_go_to_stderr_only() {
    let cfg = configs().join("threshold.json");
    let a = fmfix(&["threshold", "--config", cfg.to_str().unwrap(), "--timings"]);
    let b = fmfix(&["threshold", "--config", cfg.to_str().unwrap()]);
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stderr).contains("timings"));
}
