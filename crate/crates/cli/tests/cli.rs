//! End to end checks of the `adabag` binary: every subcommand is driven
//! through a real process, and the manifest round trip is verified byte
//! for byte.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn adabag() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_adabag"));
    // Isolate from whatever the ambient environment sets.
    c.env_remove("ADABAG_SEED");
    c
}

fn run_ok(c: &mut Command) -> Output {
    let out = c.output().expect("spawn adabag");
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn run_err(c: &mut Command, code: i32) -> String {
    let out = c.output().expect("spawn adabag");
    assert_eq!(
        out.status.code(),
        Some(code),
        "stderr:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read_json(path: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("read {}: {e}", path.display()));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("parse {}: {e}", path.display()))
}

fn simulate(dir: &Path, seed: u64) {
    run_ok(adabag()
        .arg("simulate")
        .arg("--out")
        .arg(dir)
        .arg("--seed")
        .arg(seed.to_string()));
}

const OUTPUT_FILES: [&str; 6] = [
    "report.json",
    "bfd.tsv",
    "lambda_sweep.tsv",
    "cutoff_sweep.tsv",
    "wordcloud.tsv",
    "predictions.tsv",
];

#[test]
fn simulate_writes_a_loadable_dataset_and_manifest() {
    let tmp = TempDir::new().unwrap();
    let ds = tmp.path().join("ds");
    simulate(&ds, 7);
    for f in ["matrix.smx", "labels.tsv", "features.tsv", "thresholds.tsv"] {
        assert!(ds.join(f).is_file(), "{f} missing");
    }
    let manifest = read_json(&ds.join("sim_manifest.json"));
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["variant"], "structured");
    assert_eq!(manifest["true_support"].as_array().unwrap().len(), 10);
    let kept = manifest["rows_kept"].as_u64().unwrap();
    assert!(kept > 0 && kept < manifest["n"].as_u64().unwrap());
}

#[test]
fn a_run_manifest_reproduces_the_run_byte_for_byte() {
    let tmp = TempDir::new().unwrap();
    let ds = tmp.path().join("ds");
    simulate(&ds, 5);

    let out1 = tmp.path().join("out1");
    run_ok(adabag().args([
        "run",
        "--dataset",
        ds.to_str().unwrap(),
        "--out",
        out1.to_str().unwrap(),
        "--seed",
        "3",
        "--scheme",
        "ws3",
        "--b-replicates",
        "8",
        "--grid-k",
        "20",
        "--grid-eps",
        "1e-2",
    ]));
    for f in OUTPUT_FILES {
        assert!(out1.join(f).is_file(), "{f} missing");
    }
    let report = read_json(&out1.join("report.json"));
    let test_me = report["test_me"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&test_me), "test_me {test_me}");
    assert!(report["c_star"].as_u64().unwrap() >= 1);

    // Feed the manifest straight back in; only the output directory moves.
    let manifest1 = out1.join("run_manifest.json");
    let doc = read_json(&manifest1);
    assert_eq!(doc["command"], "run");
    assert_eq!(doc["config"]["seed"], 3);
    assert_eq!(doc["config"]["scheme"], "ws3");
    assert_eq!(doc["config"]["b_replicates"], 8);

    let out2 = tmp.path().join("out2");
    run_ok(adabag().args([
        "run",
        "--config",
        manifest1.to_str().unwrap(),
        "--out",
        out2.to_str().unwrap(),
    ]));
    for f in OUTPUT_FILES {
        let a = std::fs::read(out1.join(f)).unwrap();
        let b = std::fs::read(out2.join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between the run and its replay");
    }
    let doc2 = read_json(&out2.join("run_manifest.json"));
    assert_eq!(doc2["config"], doc["config"]);
    assert_eq!(doc2["dataset"], doc["dataset"]);
}

#[test]
fn flags_override_the_config_file() {
    let tmp = TempDir::new().unwrap();
    let config = tmp.path().join("run.toml");
    std::fs::write(&config, "[config]\nb_replicates = 8\ngrid_eps = 1e-2\n").unwrap();
    // The file is valid; the flag pushes grid_eps out of range, so the
    // failure proves the flag won.
    let stderr = run_err(
        adabag().args([
            "run",
            "--config",
            config.to_str().unwrap(),
            "--grid-eps",
            "2.0",
        ]),
        2,
    );
    assert!(stderr.contains("eps"), "stderr: {stderr}");
}

#[test]
fn a_bad_config_file_names_every_problem() {
    let tmp = TempDir::new().unwrap();
    let config = tmp.path().join("bad.toml");
    std::fs::write(&config, "[config]\nb_replicates = 0\ngrid_eps = 2.0\n").unwrap();
    let stderr = run_err(adabag().args(["run", "--config", config.to_str().unwrap()]), 2);
    assert!(stderr.contains("replicate"), "stderr: {stderr}");
    assert!(stderr.contains("eps"), "stderr: {stderr}");
}

#[test]
fn config_files_need_a_known_extension() {
    let tmp = TempDir::new().unwrap();
    let config = tmp.path().join("run.cfg");
    std::fs::write(&config, "{}").unwrap();
    let stderr = run_err(adabag().args(["run", "--config", config.to_str().unwrap()]), 2);
    assert!(stderr.contains(".toml or .json"), "stderr: {stderr}");

    let missing = tmp.path().join("absent.json");
    let stderr = run_err(adabag().args(["run", "--config", missing.to_str().unwrap()]), 2);
    assert!(stderr.contains("cannot read"), "stderr: {stderr}");
}

#[test]
fn a_missing_dataset_is_an_io_failure() {
    let tmp = TempDir::new().unwrap();
    let nowhere = tmp.path().join("nowhere");
    run_err(
        adabag().args([
            "run",
            "--dataset",
            nowhere.to_str().unwrap(),
            "--out",
            tmp.path().join("out").to_str().unwrap(),
        ]),
        3,
    );
}

#[test]
fn an_unknown_scheme_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let stderr = run_err(
        adabag().args([
            "run",
            "--dataset",
            tmp.path().to_str().unwrap(),
            "--scheme",
            "ws9",
        ]),
        2,
    );
    assert!(stderr.contains("ws9"), "stderr: {stderr}");
}

#[test]
fn pca_lda_writes_a_report_and_manifest() {
    let tmp = TempDir::new().unwrap();
    let ds = tmp.path().join("ds");
    simulate(&ds, 2);
    let out = tmp.path().join("pca");
    run_ok(adabag().args([
        "pca-lda",
        "--dataset",
        ds.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "2",
    ]));
    let report = read_json(&out.join("pca_report.json"));
    let orderings = report["orderings"].as_array().unwrap();
    assert_eq!(orderings.len(), 2);
    for o in orderings {
        assert!(o["t"].as_u64().unwrap() >= 1);
        let me = o["test_me"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&me));
    }
    let manifest = read_json(&out.join("pca_manifest.json"));
    assert_eq!(manifest["command"], "pca-lda");
    assert_eq!(manifest["orderings"], serde_json::json!(["variance", "entropy"]));
}

#[test]
fn sweep_schemes_writes_one_row_per_scheme() {
    let tmp = TempDir::new().unwrap();
    let ds = tmp.path().join("ds");
    simulate(&ds, 4);
    let out = tmp.path().join("sweep");
    run_ok(adabag().args([
        "sweep-schemes",
        "--dataset",
        ds.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "1",
        "--b-replicates",
        "4",
        "--grid-k",
        "12",
        "--grid-eps",
        "1e-2",
    ]));
    let table = std::fs::read_to_string(out.join("sweep_schemes.tsv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 7, "header plus one row per scheme:\n{table}");
    assert_eq!(lines[0], "scheme\tlambda_opt\tc_star\tmodel_size\ttest_me\ttest_me_1");
    for (row, name) in lines[1..].iter().zip(["ws1", "ws2", "ws3", "ws4", "ws5", "ws6"]) {
        let fields: Vec<&str> = row.split('\t').collect();
        assert_eq!(fields.len(), 6, "row: {row}");
        assert_eq!(fields[0], name);
        let me: f64 = fields[4].parse().unwrap();
        assert!((0.0..=1.0).contains(&me));
    }
    let manifest = read_json(&out.join("sweep_manifest.json"));
    assert_eq!(manifest["command"], "sweep-schemes");
    assert_eq!(manifest["b_replicates"], 4);
}

#[test]
fn the_environment_seed_is_a_fallback() {
    let tmp = TempDir::new().unwrap();
    let ds = tmp.path().join("env_seed");
    run_ok(adabag()
        .env("ADABAG_SEED", "11")
        .args(["simulate", "--out", ds.to_str().unwrap()]));
    assert_eq!(read_json(&ds.join("sim_manifest.json"))["seed"], 11);

    let ds2 = tmp.path().join("flag_wins");
    run_ok(adabag()
        .env("ADABAG_SEED", "11")
        .args(["simulate", "--out", ds2.to_str().unwrap(), "--seed", "4"]));
    assert_eq!(read_json(&ds2.join("sim_manifest.json"))["seed"], 4);

    let stderr = run_err(
        adabag()
            .env("ADABAG_SEED", "eleven")
            .args(["simulate", "--out", tmp.path().join("bad").to_str().unwrap()]),
        2,
    );
    assert!(stderr.contains("ADABAG_SEED"), "stderr: {stderr}");
}
