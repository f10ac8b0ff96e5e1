//! Drives the `opstat` binary end to end.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn opstat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opstat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write_matrix(path: &Path) {
    let m = r#"{"dim": 3, "re": [[2, 1, 0], [1, 0, 0], [0, 0, -1]], "im": [[0, 0, 0.5], [0, 0, 0], [-0.5, 0, 0]]}"#;
    std::fs::write(path, m).unwrap();
}

#[test]
fn spectral_from_matrix_file() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.json");
    write_matrix(&h);
    let out_dir = dir.path().join("out");
    let out = opstat(&[
        "run",
        "spectral",
        "--matrix",
        h.to_str().unwrap(),
        "--partition",
        "8",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&out_dir.join("spectral.json"));
    assert!(report["cayley_roundtrip_error"].as_f64().unwrap() < 1e-10);
    let manifest = read_json(&out_dir.join("manifest.json"));
    assert_eq!(manifest["experiment"], "spectral");
    assert_eq!(manifest["seed"], 0);
    assert_eq!(manifest["parameters"]["dim"], 3);
}

#[test]
fn malformed_matrix_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.json");
    std::fs::write(&h, r#"{"dim": 2, "re": [[1, 0], [0, 1]], "imag": [[0, 0], [0, 0]]}"#).unwrap();
    let out = opstat(&["spectral", "--matrix", h.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("`imag`") && err.contains("line 1"), "{err}");
}

#[test]
fn non_hermitian_matrix_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.json");
    std::fs::write(&h, r#"{"dim": 2, "re": [[1, 2], [0, 1]], "im": [[0, 0], [0, 0]]}"#).unwrap();
    let out = opstat(&["spectral", "--matrix", h.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn holevo_additivity_writes_one_row_per_pair() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("holevo");
    let out = opstat(&[
        "run",
        "holevo-additivity",
        "--channels",
        "random",
        "--dim",
        "2",
        "--pairs",
        "20",
        "--seed",
        "7",
        "--restarts",
        "4",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("additivity.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("pair,chi_1,chi_2,chi_joint,defect"));
    assert_eq!(lines.count(), 20);
    let manifest = read_json(&out_dir.join("manifest.json"));
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["parameters"]["restarts"], 4);
}

#[test]
fn invalid_parameters_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("o");
    for args in [
        vec!["sde", "--omega", "-1"],
        vec!["holevo", "--dim", "0"],
        vec!["poisson", "--rate", "nan"],
        vec!["codec", "--no-such-flag"],
        vec!["frobnicate"],
    ] {
        let mut full = args.clone();
        full.extend(["--out", o.to_str().unwrap()]);
        let out = opstat(&full);
        assert_eq!(code(&out), 1, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn selftest_reports_all_groups() {
    let out = opstat(&["selftest"]);
    assert_eq!(code(&out), 0);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], true);
    assert!(report["version"].is_string());
    let names: Vec<&str> = report["groups"]
        .as_array()
        .unwrap()
        .iter()
        .map(|g| g["name"].as_str().unwrap())
        .collect();
    for want in [
        "projector_idempotence",
        "projector_self_adjoint",
        "projector_completeness",
        "cayley_unitarity",
        "poisson_semigroup",
        "entropy_bounds",
    ] {
        assert!(names.contains(&want), "missing {want} in {names:?}");
    }
    for g in report["groups"].as_array().unwrap() {
        assert!(g["max_defect"].as_f64().unwrap() <= g["tolerance"].as_f64().unwrap());
    }
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sde.toml");
    std::fs::write(
        &cfg,
        "experiment = \"sde-convergence\"\nseed = 3\n\n[parameters]\npaths = 50\nsteps = [16, 32, 64]\nomega = 0.25\n",
    )
    .unwrap();
    let out_dir = dir.path().join("sde");
    let out = opstat(&[
        "sde",
        "--config",
        cfg.to_str().unwrap(),
        "--omega",
        "0.5",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = read_json(&out_dir.join("manifest.json"));
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["parameters"]["paths"], 50);
    assert_eq!(manifest["parameters"]["omega"], 0.5);
    let csv = std::fs::read_to_string(out_dir.join("convergence.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"experiment": "sde-convergence", "parameters": {"pathz": 5}}"#).unwrap();
    let out = opstat(&["sde", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("pathz"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let o = dir.path().join(name);
        let out = opstat(&["poisson", "--seed", "11", "--trials", "40", "--out", o.to_str().unwrap()]);
        assert_eq!(code(&out), 0);
        o
    };
    let (a, b) = (run("a"), run("b"));
    for file in ["jumps.csv", "poisson.json"] {
        assert_eq!(std::fs::read(a.join(file)).unwrap(), std::fs::read(b.join(file)).unwrap(), "{file}");
    }
    let strip = |mut v: Value| {
        let m = v.as_object_mut().unwrap();
        for k in ["timestamp", "wall_time_s", "output_dir"] {
            m.remove(k);
        }
        v
    };
    assert_eq!(strip(read_json(&a.join("manifest.json"))), strip(read_json(&b.join("manifest.json"))));
}
