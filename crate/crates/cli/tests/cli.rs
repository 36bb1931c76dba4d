use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use su11::io::{DfuncTable, GridTable};
use tempfile::TempDir;

fn su11() -> Command {
    Command::new(env!("CARGO_BIN_EXE_su11"))
}

fn run(args: &[&str]) -> Output {
    su11().args(args).output().expect("binary runs")
}

fn write_spec(dir: &TempDir, name: &str, json: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, json).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const TMSV: &str = r#"{"variant": "tmsv", "params": {"xi": [0.485, 0.0]}, "cutoff": 60}"#;

#[test]
fn dfunc_delta_pattern_at_zero() {
    let out = run(&["dfunc", "--k", "3/2", "--tau", "0", "--no-timestamp"]);
    assert!(out.status.success());
    let t = DfuncTable::parse_str(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(t.rows.len(), 11 * 11);
    for r in &t.rows {
        let want = if r.twice_mu == r.twice_mu_prime { 1.0 } else { 0.0 };
        assert_eq!(r.d_value, want);
    }
}

#[test]
fn dfunc_lowest_weight_collapse() {
    let out = run(&["dfunc", "--k", "1/2", "--mu", "1/2", "--mu-prime", "1/2", "--tau", "1.0", "--no-timestamp"]);
    assert!(out.status.success());
    let t = DfuncTable::parse_str(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(t.rows.len(), 1);
    assert!((t.rows[0].d_value - 1.0 / 0.5f64.cosh()).abs() < 1e-15);
}

#[test]
fn malformed_half_integer_is_usage_error() {
    let out = run(&["dfunc", "--k", "1/3", "--tau", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("1/3"));
    let out = run(&["dfunc", "--k", "1/2", "--mu-max", "7/2x", "--tau", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn wigner_tmsv_peak_and_determinism() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "tmsv.json", TMSV);
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&a, &b] {
        let out = run(&["wigner", "--spec", s(&spec), "--count", "101", "--out", s(p), "--no-timestamp"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());

    let t = GridTable::parse_str(&text).unwrap();
    assert_eq!(t.to_csv_string().unwrap(), text);
    assert_eq!(t.header.get("convention"), Some("per_irrep_normalized"));
    assert_eq!(t.header.get("cutoff_a"), Some("60"));
    assert!(t.header.get("generated_unix").is_none());
    let best = t.rows.iter().max_by(|x, y| x.w_abs.total_cmp(&y.w_abs)).unwrap();
    assert!((best.xi_re - 0.485).abs() <= 0.02 && best.xi_im.abs() <= 0.02, "{best:?}");
}

#[test]
fn timestamp_is_written_by_default() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "tmsv.json", TMSV);
    let out = run(&["wigner", "--spec", s(&spec), "--count", "5"]);
    let t = GridTable::parse_str(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert!(t.header.get("generated_unix").is_some());
}

#[test]
fn empty_state_gives_zero_grid() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        &dir,
        "empty.json",
        r#"{"variant": "raw_amplitudes", "params": {"amplitudes": [[[0, 0], [0, 0]], [[0, 0], [0, 0]]]}}"#,
    );
    let out = run(&["wigner", "--spec", s(&spec), "--count", "11", "--no-timestamp"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let t = GridTable::parse_str(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert!(!t.rows.is_empty());
    assert!(t.rows.iter().all(|r| r.w_re == 0.0 && r.w_im == 0.0 && r.w_abs == 0.0));
}

#[test]
fn polar_grid() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "tmsv.json", TMSV);
    let out = run(&["wigner", "--spec", s(&spec), "--coords", "polar", "--count", "9", "--tau-max", "2", "--no-timestamp"]);
    assert!(out.status.success());
    let t = GridTable::parse_str(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(t.rows.len(), 81);
    assert!(t.rows.iter().all(|r| (0.0..=2.0).contains(&r.tau)));
}

#[test]
fn schema_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    for (name, json) in [
        ("outside.json", r#"{"variant": "tmsv", "params": {"xi": [1.0, 0.0]}}"#),
        ("unknown.json", r#"{"variant": "cat", "params": {}}"#),
        ("broken.json", "{"),
    ] {
        let spec = write_spec(&dir, name, json);
        let out = run(&["wigner", "--spec", s(&spec), "--count", "5"]);
        assert_eq!(out.status.code(), Some(2), "{name}");
    }
    let out = run(&["wigner", "--spec", "/nonexistent/spec.json"]);
    assert_eq!(out.status.code(), Some(2));
}

fn interferometer(dir: &TempDir, spec: &Path, extra: &[&str]) -> (GridTable, GridTable) {
    let (i, o) = (dir.path().join("in.csv"), dir.path().join("out.csv"));
    let mut args = vec!["interferometer", "--spec", s(spec), "--input-out", s(&i), "--output-out", s(&o), "--no-timestamp"];
    args.extend_from_slice(extra);
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let read = |p: &Path| GridTable::parse_str(&std::fs::read_to_string(p).unwrap()).unwrap();
    (read(&i), read(&o))
}

#[test]
fn interferometer_zero_phase_is_identity() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "tmsv.json", r#"{"variant": "tmsv", "params": {"xi": [0.5, 0.0]}}"#);
    let (i, o) = interferometer(&dir, &spec, &["--gain", "0.5", "--total-phase", "0", "--count", "21"]);
    assert_eq!(i.rows, o.rows);
    assert_eq!(o.header.get("role"), Some("output"));
    assert!(o.header.get("interferometer").unwrap().contains("\"gain\":0.5"));
}

#[test]
fn interferometer_routes_agree() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "tmsv.json", r#"{"variant": "tmsv", "params": {"xi": [0.5, 0.0]}}"#);
    let common = ["--gain", "0.5", "--total-phase", "1.5707963267948966", "--count", "21", "--convention", "literal"];
    let (_, cov) = interferometer(&dir, &spec, &common);
    let mut direct_args = common.to_vec();
    direct_args.extend(["--route", "direct"]);
    let (_, dir_out) = interferometer(&dir, &spec, &direct_args);
    assert_eq!(dir_out.header.get("route"), Some("direct"));
    assert_eq!(cov.rows.len(), dir_out.rows.len());
    for (a, b) in cov.rows.iter().zip(&dir_out.rows) {
        assert!((a.w_re - b.w_re).hypot(a.w_im - b.w_im) < 1e-6);
    }
}

#[test]
fn verify_quick_dfunc_passes() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("report.json");
    let out = run(&["verify", "--suite", "dfunc", "--quick", "--out", s(&report), "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    let checks = v["suites"][0]["checks"].as_array().unwrap();
    let series = checks.iter().find(|c| c["name"] == "disentangled_series").unwrap();
    assert!(series["max_residual"].as_f64().unwrap() <= 1e-8);
    assert!(v.get("generated_unix").is_none());
}

#[test]
fn verify_unknown_suite_exits_2() {
    assert_eq!(run(&["verify", "--suite", "everything"]).status.code(), Some(2));
}

#[test]
fn state_summary() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "su11.json", r#"{"variant": "su11_coherent", "params": {"k": "3/2", "xi": [0.2, 0.1]}}"#);
    let out = run(&["state", "--spec", s(&spec)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["blocks"].as_array().unwrap().len(), 1);
    assert_eq!(v["blocks"][0]["k"], "3/2");
    assert!((v["norm_sqr"].as_f64().unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn thread_cap_from_environment() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "tmsv.json", TMSV);
    let a = su11().args(["wigner", "--spec", s(&spec), "--count", "15", "--no-timestamp"]).env("SU11_THREADS", "1").output().unwrap();
    let b = su11().args(["wigner", "--spec", s(&spec), "--count", "15", "--no-timestamp"]).env("SU11_THREADS", "0").output().unwrap();
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let bad = su11().args(["wigner", "--spec", s(&spec)]).env("SU11_THREADS", "many").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
