use std::path::PathBuf;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eigenbound")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn config(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn value(out: &str, key: &str) -> f64 {
    out.lines()
        .find_map(|l| l.strip_prefix(key))
        .and_then(|rest| rest.split_whitespace().next())
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(|| panic!("no `{key}` in {out}"))
}

#[test]
fn flat_interval_bounds() {
    let o = bin(&["bounds", "--d", "1", "--K", "0", "--alpha", "0", "--lambda", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!((value(&s, "lower ") - 0.606531).abs() < 1e-6);
    assert!((value(&s, "min ") - 1.832081).abs() < 1e-6, "{s}");
}

#[test]
fn c1_c2_constants() {
    let o = bin(&["bounds", "--lambda1", "1", "--d", "1", "--K", "0", "--alpha0", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!((value(&s, "c1 ") - 0.606531).abs() < 1e-6);
    assert!((value(&s, "c2 ") - 1.832081).abs() < 1e-6);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(bin(&["bounds", "--d", "1"]).status.code(), Some(2));
    assert_eq!(bin(&["fpt", "--alpha", "0", "--eps", "0", "--t", "1"]).status.code(), Some(2));
    assert_eq!(bin(&["bounds", "--lambda", "1", "--variant", "nope"]).status.code(), Some(2));
    assert_eq!(bin(&["bounds", "--lambda", "1", "--alpha", "0.5", "--variant", "a-star"]).status.code(), Some(2));
    assert_eq!(bin(&["verify", "/no/such/config.toml"]).status.code(), Some(2));
}

#[test]
fn fpt_reflection_value_and_determinism() {
    let o = bin(&["fpt", "--alpha", "0", "--eps", "1", "--t", "1", "--paths", "20000"]);
    assert_eq!(o.status.code(), Some(0));
    assert!((value(&stdout(&o), "exact ") - 0.317311).abs() < 1e-6);

    let args = ["fpt", "--alpha", "1", "--eps", "0.5", "--t", "2", "--paths", "1000000", "--seed", "42"];
    let (a, b) = (bin(&args), bin(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(value(&stdout(&a), "z ").abs() < 4.0);
}

#[test]
fn verify_writes_identical_reports() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = config("interval-dirichlet.toml");
    for d in [&d1, &d2] {
        let o = bin(&["verify", &cfg, "--out", d.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    }
    for f in ["report.json", "report.csv", "sandwich.tsv", "modes.tsv"] {
        assert_eq!(
            std::fs::read(d1.path().join(f)).unwrap(),
            std::fs::read(d2.path().join(f)).unwrap(),
            "{f}"
        );
    }
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d1.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["pass"], true);
    assert_eq!(json["rows"].as_array().unwrap().len(), 5);

    let o = bin(&["report", d1.path().join("report.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS"));
}

#[test]
fn verify_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().to_str().unwrap();
    assert_eq!(bin(&["verify", &config("ball-d2.toml"), "--out", out]).status.code(), Some(0));
    assert_eq!(bin(&["verify", &config("interval-kv-understated.toml"), "--out", out]).status.code(), Some(3));
}

#[test]
fn solve_prints_disk_mode() {
    let o = bin(&["solve", &config("ball-d2.toml"), "--modes", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let row: Vec<f64> = s.lines().nth(1).unwrap().split_whitespace().map(|v| v.parse().unwrap()).collect();
    assert!((row[1] - 5.78319).abs() < 1e-3);
    assert!((row[3] - 1.39930).abs() < 1e-3);
}
