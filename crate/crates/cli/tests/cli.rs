use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use tomoml_cli::formats::{DatasetFile, PovmFile, ResultFile};

fn tomoml(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tomoml")).args(args).env_remove("TOMOML_SEED").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

struct Files {
    dir: TempDir,
}

impl Files {
    fn new() -> Self {
        Self { dir: tempfile::tempdir().unwrap() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_string()
    }

    fn simulate(&self, extra: &[&str]) -> (String, String) {
        let (p, d) = (self.arg("povm.json"), self.arg("data.json"));
        let mut args = vec!["simulate", "--out-povm", &p, "--out-data", &d];
        args.extend_from_slice(extra);
        let out = tomoml(&args);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        (p, d)
    }
}

fn diagonal(result: &Path) -> Vec<f64> {
    let (_, rho) = ResultFile::load(result).unwrap();
    rho.as_operator().diagonal()
}

#[test]
fn estimate_counterexample_with_armijo() {
    let f = Files::new();
    let (p, d) = f.simulate(&["--experiment", "counterexample"]);
    let out_path = f.arg("result.json");
    let out = tomoml(&["estimate", &p, &d, "--rule", "armijo", "--t-max", "1", "--out", &out_path]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let diag = diagonal(&f.path("result.json"));
    assert!((diag[0] - 1.0 / 3.0).abs() <= 1e-6);
    assert!((diag[1] - 2.0 / 3.0).abs() <= 1e-6);
    let (file, _) = ResultFile::load(&f.path("result.json")).unwrap();
    assert_eq!(file.termination, "converged");
    assert_eq!(file.config.init, "mixed");
    assert_eq!(file.config.gamma, Some(1e-4));
}

#[test]
fn estimate_rrhor_reports_cycle() {
    let f = Files::new();
    let (p, d) = f.simulate(&["--experiment", "counterexample"]);
    let out = tomoml(&["estimate", &p, &d, "--rule", "rrhor"]);
    assert_eq!(code(&out), 3);
    let result: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(result["termination"], "cycle_detected");
}

#[test]
fn estimate_max_iterations_exit_code() {
    let f = Files::new();
    let (p, d) = f.simulate(&["--experiment", "counterexample"]);
    let out = tomoml(&["estimate", &p, &d, "--rule", "fixed", "--t", "0.1", "--max-iter", "5"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn mixed_is_the_default_start() {
    let f = Files::new();
    let (p, d) = f.simulate(&["--experiment", "counterexample"]);
    let implicit = tomoml(&["estimate", &p, &d, "--rule", "fixed", "--t", "10"]);
    let explicit = tomoml(&["estimate", &p, &d, "--rule", "fixed", "--t", "10", "--init", "mixed"]);
    assert_eq!(implicit.stdout, explicit.stdout);
}

#[test]
fn estimate_restarts_from_a_result_file() {
    let f = Files::new();
    let (p, d) = f.simulate(&["--experiment", "counterexample"]);
    let first = f.arg("first.json");
    assert_eq!(code(&tomoml(&["estimate", &p, &d, "--out", &first])), 0);
    let out = tomoml(&["estimate", &p, &d, "--init", &first]);
    assert_eq!(code(&out), 0);
    let result: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(result["iterations"], 0);
}

#[test]
fn iteration_log_is_written() {
    let f = Files::new();
    let (p, d) = f.simulate(&["--experiment", "counterexample"]);
    let log = f.arg("log.csv");
    let out = tomoml(&["estimate", &p, &d, "--rule", "fixed", "--t", "0.1", "--log", &log]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(&log).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,t,loglik,residual_extremal,backtracks,iterate_distance");
    assert_eq!(lines.len(), 2 + 66);
}

#[test]
fn flags_must_match_rule() {
    let f = Files::new();
    let (p, d) = f.simulate(&["--experiment", "counterexample"]);
    for args in [
        vec!["--rule", "rrhor", "--t", "1"],
        vec!["--rule", "fixed", "--gamma", "0.1"],
        vec!["--rule", "armijo", "--alpha0", "0.7", "--alpha1", "0.6"],
        vec!["--rule", "fixed", "--t", "-1"],
        vec!["--rule", "newton"],
    ] {
        let mut full = vec!["estimate", p.as_str(), d.as_str()];
        full.extend(args.iter().copied());
        let out = tomoml(&full);
        assert_eq!(code(&out), 4, "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn malformed_json_is_an_input_error() {
    let f = Files::new();
    let (_, d) = f.simulate(&["--experiment", "counterexample"]);
    fs::write(f.path("bad.json"), "{\"dim\": 2,\n  \"effects\": [[[1, 0]]").unwrap();
    let out = tomoml(&["estimate", &f.arg("bad.json"), &d]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("bad.json:2:"), "{}", stderr(&out));
}

#[test]
fn infeasible_inputs_name_the_invariant() {
    let f = Files::new();
    let (p, _) = f.simulate(&["--experiment", "counterexample"]);
    fs::write(f.path("neg.json"), r#"{"frequencies": [1.5, -0.5]}"#).unwrap();
    let out = tomoml(&["estimate", &p, &f.arg("neg.json")]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("frequencies"), "{}", stderr(&out));

    fs::write(f.path("short.json"), r#"{"dim": 2, "effects": [[[[1, 0], [0, 0]], [[0, 0], [0.5, 0]]]]}"#).unwrap();
    let out = tomoml(&["estimate", &f.arg("short.json"), &f.arg("data.json")]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("identity"), "{}", stderr(&out));

    fs::write(f.path("three.json"), r#"{"counts": [1, 1, 1]}"#).unwrap();
    let out = tomoml(&["estimate", &p, &f.arg("three.json")]);
    assert_eq!(code(&out), 4);
}

#[test]
fn simulate_counterexample() {
    let f = Files::new();
    f.simulate(&["--experiment", "counterexample"]);
    let data = DatasetFile::load(&f.path("data.json")).unwrap();
    assert_eq!(data.frequencies(), &[1.0 / 3.0, 2.0 / 3.0]);
    assert_eq!(PovmFile::load(&f.path("povm.json")).unwrap().len(), 2);
}

#[test]
fn simulate_w_state() {
    let f = Files::new();
    f.simulate(&["--experiment", "w-state", "--qubits", "3"]);
    let povm = PovmFile::load(&f.path("povm.json")).unwrap();
    assert_eq!(povm.len(), 216);
    let data = DatasetFile::load(&f.path("data.json")).unwrap();
    assert!((data.frequencies()[26 * 8 + 1] - 1.0 / 81.0).abs() < 1e-15);
    assert!(data.total_count().is_none());
}

#[test]
fn sampled_data_is_reproducible() {
    let a = Files::new();
    let b = Files::new();
    a.simulate(&["--experiment", "w-state", "--qubits", "2", "--shots", "1000", "--seed", "7"]);
    b.simulate(&["--experiment", "w-state", "--qubits", "2", "--shots", "1000", "--seed", "7"]);
    let bytes = fs::read(a.path("data.json")).unwrap();
    assert_eq!(bytes, fs::read(b.path("data.json")).unwrap());
    let text = String::from_utf8(bytes).unwrap();
    assert!(text.contains("ChaCha8Rng"));
    assert_eq!(DatasetFile::load(&a.path("data.json")).unwrap().total_count(), Some(1000));

    let c = Files::new();
    let out = Command::new(env!("CARGO_BIN_EXE_tomoml"))
        .args(["simulate", "--experiment", "w-state", "--qubits", "2", "--shots", "1000"])
        .args(["--out-povm", &c.arg("povm.json"), "--out-data", &c.arg("data.json")])
        .env("TOMOML_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read(c.path("data.json")).unwrap(), fs::read(a.path("data.json")).unwrap());
}

#[test]
fn simulate_rejects_unknown_experiment() {
    let f = Files::new();
    let out = tomoml(&["simulate", "--experiment", "ghz", "--out-povm", &f.arg("p"), "--out-data", &f.arg("d")]);
    assert_eq!(code(&out), 4);
    let out = tomoml(&["simulate", "--experiment", "w-state", "--qubits", "9", "--out-povm", &f.arg("p"), "--out-data", &f.arg("d")]);
    assert_eq!(code(&out), 4);
}

fn sweep_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn sweep_csv_shape() {
    let f = Files::new();
    let (p, d) = f.simulate(&["--experiment", "counterexample"]);
    let out_path = f.arg("sweep.csv");
    let out = tomoml(&["sweep", "--povm", &p, "--data", &d, "--t-values", "10,0.1,1", "--rules", "fixed,armijo", "--out", &out_path]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(&out_path).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.starts_with("t,rule,iterations,converged,final_loglik\n"));
    let rows = sweep_rows(&text);
    assert_eq!(rows.len(), 6);
    let keys: Vec<(f64, &str)> = rows.iter().map(|r| (r[0].parse().unwrap(), r[1].as_str())).collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(keys, sorted);
    let fixed: Vec<usize> = rows.iter().filter(|r| r[1] == "fixed").map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(fixed, vec![66, 3, 77]);
}

#[test]
fn sweep_records_failures_as_rows() {
    let f = Files::new();
    let (p, d) = f.simulate(&["--experiment", "counterexample"]);
    let out = tomoml(&["sweep", "--povm", &p, "--data", &d, "--t-values", "log:1e-3:1e3:13", "--max-iter", "50"]);
    assert_eq!(code(&out), 0);
    let rows = sweep_rows(&stdout(&out));
    assert_eq!(rows.len(), 26);
    let last_fixed = rows.iter().rfind(|r| r[1] == "fixed").unwrap();
    assert_eq!(last_fixed[3], "false");
    assert!(stderr(&out).contains("max_iterations"));
}

#[test]
fn sweep_rejects_bad_t_values() {
    let f = Files::new();
    let (p, d) = f.simulate(&["--experiment", "counterexample"]);
    let out = tomoml(&["sweep", "--povm", &p, "--data", &d, "--t-values", "1,-2"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn w_state_sweep_full_steps_agree() {
    let f = Files::new();
    let (p, d) = f.simulate(&["--experiment", "w-state", "--qubits", "3"]);
    let out = tomoml(&["sweep", "--povm", &p, "--data", &d, "--t-values", "10,100,1000"]);
    assert_eq!(code(&out), 0);
    let rows = sweep_rows(&stdout(&out));
    for pair in rows.chunks(2) {
        assert_eq!(pair[0][1], "armijo");
        assert_eq!(pair[1][1], "fixed");
        assert_eq!(pair[0][2], pair[1][2], "t = {}", pair[0][0]);
        assert_eq!(pair[0][3], "true");
    }
}

#[test]
fn verify_report() {
    let out = tomoml(&["verify", "--trials", "50", "--seed", "3"]);
    let text = stdout(&out);
    let lemma1 = text.lines().find(|l| l.starts_with("lemma1")).unwrap();
    assert!(lemma1.contains("PASS"), "{lemma1}");
    let any_fail = text.lines().any(|l| l.contains(" FAIL "));
    assert_eq!(code(&out), if any_fail { 1 } else { 0 });
    let again = tomoml(&["verify", "--trials", "50", "--seed", "3"]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn verify_gradient_family_at_scale() {
    let out = tomoml(&["verify", "--trials", "1000", "--dim-max", "8"]);
    let text = stdout(&out);
    let fd = text.lines().find(|l| l.starts_with("gradient finite difference")).unwrap();
    assert!(fd.contains("PASS"), "{fd}");
}

#[test]
fn usage_errors_exit_with_input_code() {
    assert_eq!(code(&tomoml(&["frobnicate"])), 4);
    assert_eq!(code(&tomoml(&["verify", "--dim-max", "1"])), 4);
    assert_eq!(code(&tomoml(&["--help"])), 0);
}
