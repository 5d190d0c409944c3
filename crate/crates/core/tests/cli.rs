use std::path::{Path, PathBuf};

use dgp::cli::{exit, read_manifest, run_args};
use serde_json::Value;

fn model(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("models").join(name).display().to_string()
}

fn run_in(dir: &Path, args: &[&str]) -> i32 {
    let out = dir.display().to_string();
    let mut all: Vec<&str> = args.to_vec();
    all.extend(["--out", &out]);
    run_args(&all)
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_column(path: PathBuf, column: &str) -> Vec<f64> {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let idx = reader.headers().unwrap().iter().position(|h| h == column).unwrap();
    reader.records().map(|r| r.unwrap()[idx].parse().unwrap()).collect()
}

#[test]
fn stationary_output_is_normalized() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["stationary", "--model", &model("poisson.json"), "--V", "100"]), exit::OK);
    let p = csv_column(dir.path().join("stationary.csv"), "p");
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let meta = read_json(dir.path().join("stationary.json"));
    assert!(meta["mean"].as_f64().is_some());
    let manifest = read_manifest(dir.path()).unwrap();
    assert!(manifest.outputs.iter().any(|o| o == "stationary.csv"));
}

#[test]
fn mfpt_reports_every_requested_method() {
    let dir = tempfile::tempdir().unwrap();
    let code = run_in(
        dir.path(),
        &[
            "mfpt",
            "--model",
            &model("schlogl_deep.json"),
            "--V",
            "40",
            "--methods",
            "exact,asymptotic,kramers,mc",
            "--replicas",
            "400",
        ],
    );
    assert_eq!(code, exit::OK);
    let doc = read_json(dir.path().join("mfpt.json"));
    let est = &doc["estimates"];
    for m in ["exact", "asymptotic", "kramers", "mc"] {
        assert!(est[m].get("error").is_none(), "{m}: {}", est[m]);
    }
    let exact = est["exact"]["time"].as_f64().unwrap();
    let oracle = est["exact"]["tridiagonal"].as_f64().unwrap();
    assert!((exact / oracle - 1.0).abs() < 1e-9);
    assert!(est["kramers"]["logTime"].as_f64().unwrap().is_finite());
}

#[test]
fn schlogl_scan_has_one_maxwell_event() {
    let dir = tempfile::tempdir().unwrap();
    let code = run_in(
        dir.path(),
        &["scan", "--model", &model("schlogl.json"), "--V", "100", "--param", "mu", "--range", "0.5:1.5:200", "--x-max", "3"],
    );
    assert_eq!(code, exit::OK);
    let events: Vec<Value> = std::fs::read_to_string(dir.path().join("events.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let maxwell: Vec<&Value> = events.iter().filter(|e| e["type"] == "maxwell").collect();
    assert_eq!(maxwell.len(), 1);
    assert_eq!(events.iter().filter(|e| e["type"] == "bifurcation").count(), 2);

    let mu = maxwell[0]["mu"].as_f64().unwrap();
    let rows = csv_column(dir.path().join("phase.csv"), "mu");
    assert_eq!(rows.iter().filter(|&&m| m == mu).count(), 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_args(&["no-such-command"]), exit::USAGE);
    assert_eq!(run_args(&[]), exit::USAGE);
    assert_eq!(run_args(&["--help"]), exit::OK);
    // Missing required flag and a non-positive system size are validation failures.
    assert_eq!(run_in(dir.path(), &["stationary", "--V", "10"]), exit::VALIDATION);
    assert_eq!(run_in(dir.path(), &["stationary", "--model", &model("poisson.json"), "--V", "0"]), exit::VALIDATION);
    assert_eq!(run_in(dir.path(), &["stationary", "--model", "/nonexistent.json", "--V", "10"]), exit::VALIDATION);
    assert_eq!(
        run_in(dir.path(), &["scan", "--model", &model("schlogl.json"), "--V", "10", "--param", "k9", "--range", "0.5:1:5"]),
        exit::VALIDATION
    );
}

#[test]
fn replay_reproduces_a_run() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let code = run_in(
        first.path(),
        &["simulate", "--model", &model("schlogl.json"), "--V", "40", "--n0", "20", "--absorb", "40", "--replicas", "200", "--seed", "9"],
    );
    assert_eq!(code, exit::OK);
    let manifest = first.path().join("manifest.json").display().to_string();
    let out = second.path().display().to_string();
    assert_eq!(run_args(&["replay", &manifest, "--out", &out]), exit::OK);
    for file in ["trajectory.csv", "estimate.json"] {
        let a = std::fs::read(first.path().join(file)).unwrap();
        let b = std::fs::read(second.path().join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let runs: Vec<Vec<u8>> = ["1", "4"]
        .iter()
        .map(|threads| {
            let dir = tempfile::tempdir().unwrap();
            let code = run_in(
                dir.path(),
                &[
                    "mfpt",
                    "--model",
                    &model("schlogl.json"),
                    "--V",
                    "40",
                    "--methods",
                    "mc",
                    "--replicas",
                    "2000",
                    "--threads",
                    threads,
                ],
            );
            assert_eq!(code, exit::OK);
            std::fs::read(dir.path().join("mfpt.json")).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn other_commands_write_their_tables() {
    let dir = tempfile::tempdir().unwrap();
    let m = model("binomial.json");
    assert_eq!(run_in(dir.path(), &["potential", "--model", &m, "--V", "50", "--x-range", "0.1:0.9:9"]), exit::OK);
    assert_eq!(csv_column(dir.path().join("potential.csv"), "x").len(), 9);
    assert_eq!(run_in(dir.path(), &["decompose", "--model", &m, "--V", "50", "--x-range", "0.1:0.9:9"]), exit::OK);
    assert!(csv_column(dir.path().join("vanthoff.csv"), "phi0_tilde").iter().all(|v| v.is_finite()));
    assert_eq!(run_in(dir.path(), &["diffusion-compare", "--model", &m, "--V", "50", "--x-range", "0.1:0.9:9"]), exit::OK);
    assert_eq!(csv_column(dir.path().join("diffusion.csv"), "D_hgtt").len(), 9);
}
