use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semigroup-lab"))
        .args(args)
        .current_dir(cwd)
        .env_remove("SEMIGROUP_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn report(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(format!("{name}.json"))).unwrap()).unwrap()
}

#[test]
fn dyson_verify_writes_ledger() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "d.toml",
        "experiment = \"dyson-verify\"\nname = \"d\"\nseed = 3\nq = 2.0\nn_max = 6\n\n[operator]\ndim = 3\n\n[times]\nvalues = [0.5]\n",
    );
    let out = lab(&["run", &cfg, "--out", "res"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("res");
    let r = report(&dir, "d");
    assert_eq!(r["passed"], Value::Bool(true));
    let s = r.to_string();
    assert!(s.contains("tail_bound") && s.contains("truncation_error"), "{s}");
    assert!(dir.join("d_terms.csv").exists());
}

#[test]
fn weyl_check_finds_n_star() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "w.toml",
        "experiment = \"weyl-check\"\nname = \"w\"\nn_check = 40\n\n[domain]\nkind = \"interval\"\nn = 128\n",
    );
    let out = lab(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&tmp.path().join("results"), "w");
    assert_eq!(r["results"]["N_star"], 1);
}

#[test]
fn output_dir_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "w.toml", "experiment = \"weyl-check\"\nname = \"e\"\n\n[domain]\nkind = \"interval\"\nn = 64\n");
    let out = Command::new(env!("CARGO_BIN_EXE_semigroup-lab"))
        .args(["run", &cfg])
        .current_dir(tmp.path())
        .env("SEMIGROUP_OUT_DIR", tmp.path().join("env_out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(tmp.path().join("env_out/e.json").exists());
}

#[test]
fn bad_index_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "b.toml", "experiment = \"dyson-verify\"\nq = 0.5\n\n[operator]\ndim = 3\n\n[times]\nvalues = [0.5]\n");
    let out = lab(&["validate", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("q = 0.5"), "{err}");
    assert!(!tmp.path().join("results").exists());
}

#[test]
fn unknown_experiment_and_keys_are_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let a = write(tmp.path(), "a.toml", "experiment = \"nope\"\n");
    let b = write(tmp.path(), "b.toml", "experiment = \"weyl-check\"\nbogus = 1\n[domain]\nkind = \"interval\"\nn = 64\n");
    for cfg in [a, b] {
        let out = lab(&["validate", &cfg], tmp.path());
        assert_eq!(out.status.code(), Some(1), "{cfg}");
    }
    let out = lab(&["run", "missing.toml"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn failed_verdict_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "r.toml",
        "experiment = \"resolvent-scan\"\nname = \"r\"\ncases = 1\nq = 2.0\n\n[operator]\ndim = 3\n\n[tolerances]\nmax_decay_slope = -5.0\n",
    );
    let out = lab(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&tmp.path().join("results"), "r");
    assert_eq!(r["passed"], Value::Bool(false));
}

#[test]
fn list_experiments_and_shipped_configs_validate() {
    let tmp = tempfile::tempdir().unwrap();
    let out = lab(&["list-experiments"], tmp.path());
    assert!(out.status.success());
    let names = String::from_utf8_lossy(&out.stdout);
    for e in ["dyson-verify", "duhamel", "mixed", "resolvent-scan", "heat-kernel", "bq-probe", "weyl-check", "heat-trace"] {
        assert!(names.contains(e), "{e} missing from {names}");
    }
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for entry in fs::read_dir(configs).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|x| x == "toml") {
            let out = lab(&["validate", p.to_str().unwrap()], tmp.path());
            assert!(out.status.success(), "{}: {}", p.display(), String::from_utf8_lossy(&out.stderr));
        }
    }
}
