#![cfg(feature = "cli")]

use std::path::Path;
use std::process::Command;

use proptest::prelude::*;

use accel_newton::harness::{
    echo_path, parse_libsvm, read_libsvm, resolve, run_experiment, summarize, write_libsvm,
    ExperimentConfig, LabelPolicy, LibsvmOptions, CSV_HEADER,
};
use accel_newton::linalg::Matrix;
use accel_newton::Error;

const SYNTH: &str = r#"
output = "out/trace.csv"
seeds = [0, 1, 2]

[problem]
kind = "synth_quadratic"
d = 30
n = 60
kappa = 20.0
lambda = 0.1

[options]
max_iters = 400
target_subopt = 1e-10

[[algorithm]]
kind = "arssn"
fraction = 0.2
c = 0.5

[[algorithm]]
kind = "rssn"
fraction = 0.2
c = 0.5

[[algorithm]]
kind = "agd"
"#;

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn synthetic_run_writes_csv_echo_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::load(write(dir.path(), "exp.toml", SYNTH)).unwrap();
    let out = run_experiment(&cfg).unwrap();
    assert_eq!(out.runs.len(), 9);
    let csv = std::fs::read_to_string(&out.config.output).unwrap();
    assert!(csv.starts_with(&CSV_HEADER.join(",")));
    assert!(echo_path(&out.config.output).exists());

    let rows = summarize(&out.config.output, 1e-10).unwrap();
    let names: Vec<&str> = rows.iter().map(|r| r.algorithm.as_str()).collect();
    assert_eq!(names, ["arssn-20%", "rssn-20%", "agd"]);
    for r in &rows {
        assert_eq!(r.runs, 3);
        assert_eq!(r.reached, 3, "{} did not reach the target", r.algorithm);
    }
    // rows stop at the target, so the final subopt sits at or below it
    for run in &out.runs {
        let last = run.trace.records.last().unwrap();
        assert!(last.metric.unwrap() <= 1e-10);
    }
}

#[test]
fn echo_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::load(write(dir.path(), "exp.toml", SYNTH)).unwrap();
    let first = run_experiment(&cfg).unwrap();
    let bytes = std::fs::read(&first.config.output).unwrap();
    let echo = ExperimentConfig::load(echo_path(&first.config.output)).unwrap();
    let again = run_experiment(&echo).unwrap();
    assert_eq!(std::fs::read(&again.config.output).unwrap(), bytes);
}

#[test]
fn libsvm_logistic_problem_resolves() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "data.svm", "1 1:0.5 3:1\n0 2:2\n1 1:-1 2:1 3:0.25\n0 3:-2\n");
    let text = r#"
output = "t.csv"
[problem]
kind = "logistic"
data = "data.svm"
[[algorithm]]
kind = "rssn"
samples = 2
"#;
    let cfg = ExperimentConfig::load(write(dir.path(), "c.toml", text)).unwrap();
    let (resolved, prepared) = resolve(&cfg).unwrap();
    assert_eq!(prepared.objective.dim(), 3);
    assert_eq!(prepared.objective.num_samples(), 4);
    assert!(prepared.suboptimality.is_none());
    let echoed = resolved.to_toml().unwrap();
    assert!(echoed.contains("lambda = 0.25"), "{echoed}");
    assert!(echoed.contains("grad_tol = 0.00000001"), "{echoed}");
}

#[test]
fn anneal_constant_follows_data_density() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "sparse.svm", "1 1:1\n0 4:2\n1 2:-1\n0 3:1\n");
    let cases = [
        (r#"kind = "synth_quadratic"
d = 10
kappa = 10.0
lambda = 0.1"#, 16.0),
        (r#"kind = "logistic"
data = "sparse.svm""#, 30.0),
    ];
    for (problem, expected) in cases {
        let text = format!(
            "output = \"t.csv\"\n[problem]\n{problem}\n[[algorithm]]\nkind = \"arssn\"\nfraction = 0.5\nmomentum = {{ kind = \"anneal\" }}\n"
        );
        let cfg = ExperimentConfig::load(write(dir.path(), "a.toml", &text)).unwrap();
        let (resolved, _) = resolve(&cfg).unwrap();
        let echoed = resolved.to_toml().unwrap();
        assert!(echoed.contains(&format!("k = {expected:?}")), "{echoed}");
    }
}

#[test]
fn config_errors_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let missing = SYNTH.replace("kind = \"agd\"", "kind = \"agd\"\nbogus = 1");
    let p = write(dir.path(), "bad.toml", &missing);
    assert!(matches!(ExperimentConfig::load(&p), Err(Error::Config(_))));
    assert!(matches!(ExperimentConfig::load(dir.path().join("nope.toml")), Err(Error::Io { .. })));
}

#[test]
fn read_libsvm_reports_missing_files() {
    let err = read_libsvm("/definitely/not/here.svm", &LibsvmOptions::default()).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
}

#[test]
fn cli_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_accel-newton");
    let dir = tempfile::tempdir().unwrap();
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(status(&["run", "--config", "/no/such/config.toml"]), Some(2));
    assert_eq!(status(&["frobnicate"]), Some(1));
    let svm = dir.path().join("q.svm");
    assert_eq!(status(&["gen", "--d", "8", "--n", "12", "--kappa", "10", "--lambda", "0.1", "--out", svm.to_str().unwrap()]), Some(0));
    let data = read_libsvm(&svm, &LibsvmOptions { labels: LabelPolicy::Raw, n_features: Some(8) }).unwrap();
    assert_eq!(data.a.nrows(), 12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn libsvm_round_trip(
        rows in prop::collection::vec(
            (prop::collection::btree_map(0usize..30, -1e6..1e6f64, 0..8), -3i32..3),
            1..15,
        )
    ) {
        let mut indptr = vec![0];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (entries, _) in &rows {
            for (&j, &v) in entries {
                indices.push(j);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        let labels: Vec<f64> = rows.iter().map(|r| r.1 as f64).collect();
        let a = Matrix::csr(rows.len(), 30, indptr, indices, values).unwrap();
        let text = write_libsvm(&a, &labels).unwrap();
        let back = parse_libsvm(&text, &LibsvmOptions { labels: LabelPolicy::Raw, n_features: Some(30) }).unwrap();
        prop_assert_eq!(back.a.csr_parts(), a.csr_parts());
        prop_assert_eq!(back.labels.as_slice(), &labels[..]);
    }
}
