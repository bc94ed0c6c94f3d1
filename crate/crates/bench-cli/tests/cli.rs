//! End-to-end CLI checks against a local LIBSVM file: run, grid,
//! parse-check, report, and the output files they write.

use std::fs;
use std::path::Path;
use std::process::Command;

use gsa_core::synth::blobs;

fn write_blobs(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("blobs.libsvm");
    fs::write(&path, blobs(150, 9).to_libsvm_string()).unwrap();
    path
}

fn gsa_bench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gsa-bench"))
}

#[test]
fn run_writes_metrics_model_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_blobs(dir.path());
    let out = dir.path().join("out");

    let status = gsa_bench()
        .args([
            "run",
            "--dataset",
            data.to_str().unwrap(),
            "--model",
            "logistic",
            "--optimizer",
            "gsa",
            "--passes",
            "3",
            "--seed",
            "5",
            "--output-dir",
            out.to_str().unwrap(),
            "--save-model",
            "--trace",
        ])
        .status()
        .unwrap();
    assert!(status.success());

    let csv = fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert!(csv.starts_with(
        "dataset,optimizer,hyperparams,seed,pass,loss,precision,auc,elapsed_ms,diverged"
    ));
    assert_eq!(csv.lines().count(), 4); // header + 3 passes

    let model = fs::read_to_string(out.join("model.txt")).unwrap();
    assert!(model.starts_with("gsa-model v1\nlogistic 1 "));

    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(trace.starts_with("step,eta,mean_eta"));
    assert!(trace.lines().count() > 100);
}

#[test]
fn run_from_config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_blobs(dir.path());
    let out = dir.path().join("out");
    let config = dir.path().join("run.toml");
    fs::write(
        &config,
        format!(
            "dataset = {:?}\nmodel = \"logistic\"\noptimizer = \"sgd\"\npasses = 2\nseed = 3\noutput_dir = {:?}\n\n[hyperparams]\nrate = 0.5\n",
            data.to_str().unwrap(),
            out.to_str().unwrap()
        ),
    )
    .unwrap();

    let status = gsa_bench()
        .args(["run", "--config", config.to_str().unwrap(), "--passes", "1"])
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(out.join("metrics.csv")).unwrap();
    // flag override wins: a single pass
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.contains(",sgd,r=0.5,"));
}

#[test]
fn grid_writes_csv_and_markdown() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_blobs(dir.path());
    let out = dir.path().join("grid-out");
    let config = dir.path().join("grid.toml");
    fs::write(
        &config,
        format!(
            r#"repeats = 2

[base]
dataset = {:?}
model = "logistic"
passes = 2
seed = 1
output_dir = {:?}

[[grid]]
optimizer = "gsa"

[[grid]]
optimizer = "sgd"
rate = 0.5

[[grid]]
optimizer = "adadelta"
eps = 1e-2
"#,
            data.to_str().unwrap(),
            out.to_str().unwrap()
        ),
    )
    .unwrap();

    let status = gsa_bench()
        .args(["grid", "--config", config.to_str().unwrap(), "--jobs", "2"])
        .status()
        .unwrap();
    assert!(status.success());

    let csv = fs::read_to_string(out.join("grid.csv")).unwrap();
    // 3 cells x 2 repeats x 2 passes + header
    assert_eq!(csv.lines().count(), 13);

    let md = fs::read_to_string(out.join("grid.md")).unwrap();
    assert!(md.contains("| gsa | / |"));
    assert!(md.contains("Err(GSA-best)"));
    assert!(md.contains("±"));
}

#[test]
fn parse_check_reports_shape() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_blobs(dir.path());
    let output = gsa_bench().args(["parse-check", data.to_str().unwrap()]).output().unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("samples:    150"));
    assert!(stdout.contains("classes:    2"));
}

#[test]
fn report_renders_markdown_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_blobs(dir.path());
    let out = dir.path().join("out");
    assert!(gsa_bench()
        .args([
            "run",
            "--dataset",
            data.to_str().unwrap(),
            "--model",
            "logistic",
            "--optimizer",
            "gsa",
            "--passes",
            "2",
            "--output-dir",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap()
        .success());

    let md_path = dir.path().join("report.md");
    let status = gsa_bench()
        .args([
            "report",
            "--input",
            out.join("metrics.csv").to_str().unwrap(),
            "--output",
            md_path.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let md = fs::read_to_string(&md_path).unwrap();
    assert!(md.contains("| Algo. | hyper-para. |"));
    assert!(md.contains("| gsa | / |"));
}

#[test]
fn offline_fetch_of_uncached_dataset_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let output = gsa_bench()
        .args(["--cache-dir", dir.path().to_str().unwrap(), "--offline", "fetch", "w1a"])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("not cached"), "{stderr}");
}
