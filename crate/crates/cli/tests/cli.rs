//! End-to-end runs of the `qnls` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qnls(args: &[&str], out: &Path, envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qnls"));
    cmd.args(args).arg("--output-path").arg(out).env_remove("QNLS_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("qnls runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn manifest(dir: &Path, command: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(format!("{command}.json"))).unwrap()).unwrap()
}

#[test]
fn plane_wave_simulation_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = qnls(&["simulate", "--initial", "plane_wave", "--amplitude", "0.5", "--t", "1", "--n", "4", "--m", "4"], dir.path(), &[]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).starts_with("PASS simulate:"));
    assert_eq!(stdout(&o).lines().count(), 1);
    assert!(dir.path().join("trajectory/manifest.json").exists());
    let m = manifest(dir.path(), "simulate");
    assert_eq!(m["schema_version"], 1);
    assert_eq!(m["config"]["initial"], "plane_wave");
    assert_eq!(fs::read_to_string(dir.path().join("simulate.csv")).unwrap().lines().count(), 1 + 11);
}

#[test]
fn density_check_at_time_zero_gives_zero_densities() {
    let dir = tempfile::tempdir().unwrap();
    let o = qnls(&["density-check", "--t", "0", "--n-samples", "50"], dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("density-check.csv")).unwrap();
    assert!(csv.lines().count() > 1);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",0.0,0.0,0.0")));
}

#[test]
fn output_is_byte_identical_across_runs_and_thread_counts() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["transport-mc", "--n-samples", "3000", "--seed", "9"];
    let oa = qnls(&args, a.path(), &[("QNLS_THREADS", "1")]);
    let ob = qnls(&args, b.path(), &[("QNLS_THREADS", "4")]);
    assert!(oa.status.success() && ob.status.success(), "{}{}", stdout(&oa), stdout(&ob));
    assert_eq!(stdout(&oa), stdout(&ob));
    let read = |d: &Path| fs::read(d.join("transport-mc.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    let csv = String::from_utf8(read(a.path())).unwrap();
    assert!(csv.starts_with("observable,lhs,lhs_stderr,rhs,rhs_stderr,z\nconstant,"));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"s": 2.5, "M": 8, "N": 2, "t": 0.1, "n_samples": 200, "R": null}"#).unwrap();
    let o = qnls(&["moments", "--config", cfg.to_str().unwrap(), "--n-samples", "500"], dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = manifest(dir.path(), "moments");
    assert_eq!(m["config"]["s"], 2.5);
    assert_eq!(m["config"]["n_samples"], 500);
    assert_eq!(m["config"]["R"], Value::Null);
}

#[test]
fn invalid_configuration_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let o = qnls(&["moments", "--m", "200"], dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`M`"), "{}", stderr(&o));

    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"s": 2.0, "tau": 1.0}"#).unwrap();
    let o = qnls(&["moments", "--config", cfg.to_str().unwrap()], dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`tau`"), "{}", stderr(&o));

    let o = qnls(&["moments", "--s", "1.2"], dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`s`"));

    let o = qnls(&["moments"], dir.path(), &[("QNLS_THREADS", "many")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("QNLS_THREADS"));
    assert!(!dir.path().join("moments.json").exists());
}

#[test]
fn failing_checks_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    // no draw satisfies so tight a cutoff
    let o = qnls(&["density-check", "--r", "0.01", "--n-samples", "20"], dir.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("FAIL density-check:"));
    assert_eq!(manifest(dir.path(), "density-check")["pass"], false);
}

#[test]
fn liouville_and_lemmas_pass() {
    let dir = tempfile::tempdir().unwrap();
    let o = qnls(&["liouville", "--n", "2", "--m", "4", "--n-samples", "10"], dir.path(), &[]);
    assert!(o.status.success(), "{}", stdout(&o));
    let o = qnls(&["lemmas"], dir.path(), &[]);
    assert!(o.status.success(), "{}", stdout(&o));
    let csv = fs::read_to_string(dir.path().join("lemmas.csv")).unwrap();
    assert!(csv.starts_with("lemma,params,count_or_ratio,bound\ncounting,"));
}
