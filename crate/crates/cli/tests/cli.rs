use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn fixture(name: &str) -> String {
    format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn nlslab(args: &[&str], config: Option<&Value>, dir: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nlslab"));
    cmd.env_remove("NLSLAB_OUT_DIR").env_remove("NLSLAB_THREADS");
    cmd.args(args).arg("--out").arg(dir.join("out"));
    if let Some(cfg) = config {
        let path = dir.join("config.json");
        std::fs::write(&path, serde_json::to_vec(cfg).unwrap()).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))).unwrap()
}

#[test]
fn verify_passes_and_fails_with_exit_codes() {
    let dir = TempDir::new().unwrap();
    let ok = nlslab(
        &["lambda", "verify"],
        Some(&json!({"set": {"path": fixture("unit_square.json")}, "exhaustive": true})),
        dir.path(),
    );
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    let report = read_json(dir.path().join("out/verify.json"));
    assert_eq!(report["command"], "lambda verify");
    let manifest = read_json(dir.path().join("out/manifest.json"));
    assert_eq!(manifest["artifacts"][0]["file"], "verify.json");
    assert_eq!(manifest["config_hash"], report["config_hash"]);

    let bad = nlslab(
        &["lambda", "verify"],
        Some(&json!({"set": {"path": fixture("unit_square_extra.json")}})),
        dir.path(),
    );
    assert_eq!(code(&bad), 3);
}

#[test]
fn config_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let unknown = nlslab(&["cf"], Some(&json!({"omega": "sqrt:2", "depht": 5})), dir.path());
    assert_eq!(code(&unknown), 2);
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("depht"));
    let ladder = json!({"set": {"path": fixture("n3_seed1.json"), "scale": [3, 2]}, "shadow": {"ladder": [8.0, 4.0]}});
    assert_eq!(code(&nlslab(&["shadow"], Some(&ladder), dir.path())), 2);
    let missing = Command::new(env!("CARGO_BIN_EXE_nlslab"))
        .args(["cf", "--config", "/nonexistent/cfg.json"])
        .output()
        .unwrap();
    assert_eq!(code(&missing), 2);
    assert_eq!(code(&nlslab(&["params"], Some(&json!({"s": "1"})), dir.path())), 2);
}

#[test]
fn params_examples() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&nlslab(&["params"], None, dir.path())), 0);
    let r = read_json(dir.path().join("out/params.json"));
    assert_eq!(r["report"]["n"], 46);
    assert_eq!(code(&nlslab(&["params"], Some(&json!({"c": "8", "s": "2"})), dir.path())), 0);
    assert_eq!(read_json(dir.path().join("out/params.json"))["report"]["n"], 12);
    assert_eq!(code(&nlslab(&["params"], Some(&json!({"c": "2", "s": "3"})), dir.path())), 0);
    let r = read_json(dir.path().join("out/params.json"));
    assert_eq!(r["report"]["n"], 7);
    assert_eq!(r["report"]["ln_lambda"], "78125");
}

#[test]
fn runs_are_deterministic_and_replayable() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({"n": 3, "seed": 5});
    assert_eq!(code(&nlslab(&["lambda", "build"], Some(&cfg), dir.path())), 0);
    let first = std::fs::read(dir.path().join("out/lambda_set.json")).unwrap();
    assert_eq!(code(&nlslab(&["lambda", "build"], Some(&cfg), dir.path())), 0);
    assert_eq!(std::fs::read(dir.path().join("out/lambda_set.json")).unwrap(), first);

    let manifest = dir.path().join("out/manifest.json");
    let saved = dir.path().join("saved_manifest.json");
    std::fs::copy(&manifest, &saved).unwrap();
    std::fs::remove_file(dir.path().join("out/lambda_set.json")).unwrap();
    let replay = nlslab(&["replay", saved.to_str().unwrap()], None, dir.path());
    assert_eq!(code(&replay), 0, "{}", String::from_utf8_lossy(&replay.stderr));
    assert_eq!(std::fs::read(dir.path().join("out/lambda_set.json")).unwrap(), first);
    assert_eq!(read_json(manifest)["seed"], 5);
}

#[test]
fn output_dir_from_environment() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("env-out");
    let out = Command::new(env!("CARGO_BIN_EXE_nlslab"))
        .arg("cf")
        .env("NLSLAB_OUT_DIR", &target)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(target.join("cf.json").exists() && target.join("manifest.json").exists());
}

#[test]
fn nf_check_exact_and_resonant() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({"set": {"path": fixture("n3_seed1.json")}, "omega": "rat:7/5"});
    let ok = nlslab(&["nf", "check"], Some(&cfg), dir.path());
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    // the unscaled N = 3 fixture has an A(1) quartet resonant at ω² = 2
    let cfg = json!({"set": {"path": fixture("n3_seed1.json")}, "omega": "sqrt:2"});
    assert_eq!(code(&nlslab(&["nf", "check"], Some(&cfg), dir.path())), 3);
}

#[test]
fn csv_artifacts_carry_the_config_hash() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({"n": 3, "t_end": 2.0, "stride": 1});
    assert_eq!(code(&nlslab(&["toy", "run"], Some(&cfg), dir.path())), 0);
    let csv = std::fs::read_to_string(dir.path().join("out/toy_trajectory.csv")).unwrap();
    let hash = read_json(dir.path().join("out/manifest.json"))["config_hash"]
        .as_str()
        .unwrap()
        .to_string();
    assert_eq!(csv.lines().next().unwrap(), format!("# config_hash={hash}"));
    assert!(csv.lines().nth(1).unwrap().starts_with("t,"));
}
