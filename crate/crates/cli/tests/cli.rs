use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn osproj(args: &[&str], tol_scale: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_osproj"));
    cmd.args(args).env_remove("OSPROJ_TOL_SCALE");
    if let Some(s) = tol_scale {
        cmd.env("OSPROJ_TOL_SCALE", s);
    }
    cmd.output().expect("binary runs")
}

fn json_stdout(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("stdout is not json ({e}): {}", String::from_utf8_lossy(&o.stdout))
    })
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const CIRCLE_ZERO_IDEMPOTENCY: &str = r#"{
  "scenario": "projection",
  "action": { "kind": "circle", "weights": [0, 1, 3] },
  "verification": { "seed": 1, "tolerances": { "idempotency": 0.0, "invariance": 0.0 } }
}"#;

#[test]
fn run_trivial_passes() {
    let o = osproj(&["run", configs_dir().join("trivial.json").to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json_stdout(&o);
    assert_eq!(r["status"], "pass");
    assert_eq!(r["config_file"], "trivial.json");
}

#[test]
fn run_pinching_writes_report_and_timings() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("z2.report.json");
    let cfg = configs_dir().join("z2_pinching.json");
    let o = osproj(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["measurements"]["range_dim"], 2);
    assert!(r["measurements"]["idempotency_defect"].as_f64().unwrap() <= 1e-12);
    let t: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("z2.report.json.timings.json")).unwrap()).unwrap();
    assert!(t["seconds"]["average"].as_f64().is_some());
}

#[test]
fn insufficient_quadrature_is_a_config_error() {
    let cfg = configs_dir().join("invalid/circle_two_nodes.json");
    let o = osproj(&["run", cfg.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    let r = json_stdout(&o);
    assert_eq!(r["status"], "config_error");
    assert!(r["error"].as_str().unwrap().contains("insufficient quadrature"));
}

#[test]
fn malformed_and_unknown_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("broken.json", "{ \"scenario\": "),
        ("unknown_key.json", r#"{ "scenario": "projection", "colour": 1 }"#),
        ("missing_action.json", r#"{ "scenario": "projection", "verification": { "seed": 1 } }"#),
        (
            "missing_seed.json",
            r#"{ "scenario": "projection", "action": { "kind": "circle", "weights": [0, 1] } }"#,
        ),
    ];
    for (name, text) in cases {
        let p = write(dir.path(), name, text);
        let o = osproj(&["run", p.to_str().unwrap()], None);
        assert_eq!(o.status.code(), Some(2), "{name}");
    }
    let o = osproj(&["run", dir.path().join("absent.json").to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failing_invariant_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "strict.json", CIRCLE_ZERO_IDEMPOTENCY);
    let o = osproj(&["run", p.to_str().unwrap()], None);
    let r = json_stdout(&o);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(r["status"], "fail");
    assert!(r["failed"].as_array().unwrap().iter().any(|f| f == "idempotency"));
}

#[test]
fn tolerance_scale_tightens_every_threshold() {
    let cfg = configs_dir().join("circle_01.json");
    let o = osproj(&["run", cfg.to_str().unwrap()], Some("1e-30"));
    assert_eq!(o.status.code(), Some(3));
    let r = json_stdout(&o);
    assert!((r["tol_scale"].as_f64().unwrap() / 1e-30 - 1.0).abs() < 1e-12);
    assert!(String::from_utf8_lossy(&o.stderr).contains("OSPROJ_TOL_SCALE"));

    let o = osproj(&["run", cfg.to_str().unwrap()], Some("2"));
    assert_eq!(o.status.code(), Some(0));
    let r = json_stdout(&o);
    let idem = r["invariants"].as_array().unwrap().iter().find(|i| i["name"] == "idempotency").unwrap();
    assert!((idem["threshold"].as_f64().unwrap() / 2e-8 - 1.0).abs() < 1e-12);

    for bad in ["0", "-1", "abc", "nan"] {
        let o = osproj(&["run", cfg.to_str().unwrap()], Some(bad));
        assert_eq!(o.status.code(), Some(2), "{bad}");
    }
}

#[test]
fn empty_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = osproj(&["suite", dir.path().to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0));
    let r = json_stdout(&o);
    assert_eq!(r["runs"].as_array().unwrap().len(), 0);
    assert_eq!(r["exit_code"], 0);
}

#[test]
fn suite_reports_worst_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(configs_dir().join("trivial.json"), dir.path().join("a_trivial.json")).unwrap();
    write(dir.path(), "b_broken.json", "not json");
    let out = dir.path().join("out");
    let o = osproj(&["suite", dir.path().to_str().unwrap(), "--out-dir", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    let agg: Value = serde_json::from_str(&std::fs::read_to_string(out.join("suite.json")).unwrap()).unwrap();
    let runs = agg["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 2);
    assert_eq!(runs[0]["config"], "a_trivial.json");
    assert_eq!(runs[0]["exit_code"], 0);
    assert_eq!(runs[1]["exit_code"], 2);
    assert!(out.join("a_trivial.report.json").exists());
    assert!(out.join("b_broken.report.json").exists());
}

#[test]
fn suite_on_missing_dir_exits_2() {
    let o = osproj(&["suite", "/nonexistent/osproj/suite"], None);
    assert_eq!(o.status.code(), Some(2));
}

fn cbnorm(file: &str, extra: &[&str]) -> (Option<i32>, Value) {
    let path = data(file);
    let mut args = vec!["cbnorm", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = osproj(&args, None);
    let v = if o.status.success() { json_stdout(&o) } else { Value::Null };
    (o.status.code(), v)
}

#[test]
fn cbnorm_identity() {
    let (code, v) = cbnorm("identity2.superop", &[]);
    assert_eq!(code, Some(0));
    assert!((v["lower"].as_f64().unwrap() - 1.0).abs() <= 1e-6);
    assert!((v["upper"].as_f64().unwrap() - 1.0).abs() <= 1e-6);
}

#[test]
fn cbnorm_transpose_uses_sdp() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("witness.txt");
    let (code, v) = cbnorm("transpose2.superop", &["--seed", "3", "--witness", w.to_str().unwrap()]);
    assert_eq!(code, Some(0));
    assert_eq!(v["method"], "sdp");
    assert!(v["lower"].as_f64().unwrap() >= 2.0 - 1e-4);
    assert!(v["upper"].as_f64().unwrap() <= 2.0 + 1e-4);
    let witness = osproj_core::linalg::parse_matrix(&std::fs::read_to_string(&w).unwrap()).unwrap();
    assert_eq!(witness.shape(), (4, 4));
}

#[test]
fn cbnorm_cp_map_and_factorization_fallback() {
    let (code, v) = cbnorm("diag_sandwich.superop", &[]);
    assert_eq!(code, Some(0));
    assert_eq!(v["method"], "completely_positive");
    assert!((v["upper"].as_f64().unwrap() - 4.0).abs() <= 1e-4);

    let (code, v) = cbnorm("transpose2.superop", &["--sdp-max-choi-dim", "1"]);
    assert_eq!(code, Some(0));
    assert_eq!(v["method"], "factorization");
    assert!(v["upper"].as_f64().unwrap() >= 2.0 - 1e-9);
}

#[test]
fn cbnorm_rejects_bad_input() {
    assert_eq!(cbnorm("malformed.superop", &[]).0, Some(2));
    assert_eq!(cbnorm("absent.superop", &[]).0, Some(2));
    assert_eq!(cbnorm("identity2.superop", &["--tol", "0"]).0, Some(2));
    assert_eq!(cbnorm("identity2.superop", &["--bogus"]).0, Some(2));
}

#[test]
fn library_suite_matches_binary_layout() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(configs_dir().join("z3_circulant.json"), dir.path().join("z3.json")).unwrap();
    let s = osproj_cli::commands::suite(dir.path(), Some(&dir.path().join("out")), 1.0).unwrap();
    assert_eq!(s.exit_code, 0);
    assert_eq!(s.runs.len(), 1);
    assert_eq!(s.aggregate["runs"][0]["report"], "z3.report.json");
    // Outputs written into the scanned directory are not picked up again.
    let again = osproj_cli::commands::suite_configs(&dir.path().join("out")).unwrap();
    assert!(again.is_empty());
}
