use std::path::Path;
use std::process::{Command, Output};

use palpate::grid::{write_grid, GridGeometry, PayloadEncoding};
use sha2::{Digest, Sha256};

fn palpate(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_palpate"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn digest(path: &Path) -> Vec<u8> {
    Sha256::digest(std::fs::read(path).unwrap()).to_vec()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn steady_state_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = palpate(dir.path(), &["check-steady-state", "--E", "4480", "--rho", "960", "--ell", "0.005", "--Tc", "0.1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("T_e = 2.3146 ms"), "{text}");
    assert!(text.contains("verdict: ok"));

    let short = palpate(dir.path(), &["check-steady-state", "--E", "4480", "--rho", "960", "--ell", "0.005", "--Tc", "0.01"]);
    assert_eq!(short.status.code(), Some(0));
    assert!(stdout(&short).contains("verdict: too short"));
}

#[test]
fn usage_and_input_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(palpate(dir.path(), &["check-steady-state", "--E", "1", "--bogus", "2"]).status.code(), Some(1));
    assert_eq!(palpate(dir.path(), &["estimate-modulus", "--probes", "missing.jsonl", "--out", "r.json"]).status.code(), Some(1));
    assert_eq!(
        palpate(dir.path(), &["check-steady-state", "--E", "4480", "--rho", "-1", "--ell", "0.005", "--Tc", "0.1"]).status.code(),
        Some(1)
    );
    assert_eq!(palpate(dir.path(), &["--help"]).status.code(), Some(0));

    // a single-signed field has nothing to triangulate
    let g = GridGeometry::cube(3, 6, [0.0; 3], 1.0).unwrap();
    write_grid(&dir.path().join("pos.toml"), &g.sample(|_| 1.0), PayloadEncoding::Base64).unwrap();
    assert_eq!(palpate(dir.path(), &["export-mesh", "--input", "pos.toml", "--out", "m.obj"]).status.code(), Some(1));
}

#[test]
fn stalled_reinit_exits_with_two_and_keeps_the_iterate() {
    let dir = tempfile::tempdir().unwrap();
    let g = GridGeometry::cube(3, 21, [0.0; 3], 2.0).unwrap();
    let doubled = g.sample(|x| 2.0 * ((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt() - 0.5));
    write_grid(&dir.path().join("in.toml"), &doubled, PayloadEncoding::SiblingFile).unwrap();
    let out = palpate(dir.path(), &["reinit", "--input", "in.toml", "--out", "out.toml", "--max-iterations", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("reinit"));
    assert!(dir.path().join("out.toml").exists());
    assert!(dir.path().join("out.toml.manifest.toml").exists());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let runs: Vec<_> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    for dir in &runs {
        let d = dir.path();
        let sim = palpate(d, &["simulate", "--samples", "40", "--sigma", "0.001", "--seed", "7", "--out", "p.jsonl"]);
        assert_eq!(sim.status.code(), Some(0), "{}", String::from_utf8_lossy(&sim.stderr));
        let est = palpate(d, &["estimate-modulus", "--probes", "p.jsonl", "--out", "e.json"]);
        assert_eq!(est.status.code(), Some(0));
        let rec = palpate(
            d,
            &["reconstruct", "--probes", "p.jsonl", "--out", "f.toml", "--grid-n", "32", "--max-iterations", "40"],
        );
        assert!(matches!(rec.status.code(), Some(0) | Some(2)));
        let mesh = palpate(d, &["export-mesh", "--input", "f.toml", "--out", "m.obj"]);
        assert_eq!(mesh.status.code(), Some(0));
    }
    let files = [
        "p.jsonl",
        "p.jsonl.manifest.toml",
        "e.json",
        "e.json.manifest.toml",
        "f.toml",
        "f.bin",
        "f.toml.report.json",
        "f.toml.manifest.toml",
        "m.obj",
        "m.obj.manifest.toml",
    ];
    for f in files {
        assert_eq!(digest(&runs[0].path().join(f)), digest(&runs[1].path().join(f)), "{f}");
    }
    let other = tempfile::tempdir().unwrap();
    palpate(other.path(), &["simulate", "--samples", "40", "--sigma", "0.001", "--seed", "8", "--out", "p.jsonl"]);
    assert_ne!(digest(&other.path().join("p.jsonl")), digest(&runs[0].path().join("p.jsonl")));
}

#[test]
fn manifest_echoes_seed_and_config() {
    let dir = tempfile::tempdir().unwrap();
    palpate(dir.path(), &["simulate", "--samples", "5", "--seed", "99", "--E", "6000", "--out", "p.jsonl"]);
    let text = std::fs::read_to_string(dir.path().join("p.jsonl.manifest.toml")).unwrap();
    let m: toml::Value = toml::from_str(&text).unwrap();
    assert_eq!(m["command"].as_str(), Some("simulate"));
    assert_eq!(m["config"]["campaign"]["rng_seed"].as_integer(), Some(99));
    assert_eq!(m["config"]["material"]["youngs"].as_float(), Some(6000.0));
    assert_eq!(m["config"]["shape"]["kind"].as_str(), Some("sphere"));
    assert_eq!(m["argv"][0].as_str(), Some("palpate"));
}

#[test]
fn estimate_kappa_on_a_force_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let sim = palpate(
        dir.path(),
        &["simulate", "--samples", "3", "--forces", "0.04,0.06,3,4.5", "--seed", "1", "--out", "p.jsonl"],
    );
    assert_eq!(sim.status.code(), Some(0));
    let out = palpate(dir.path(), &["estimate-kappa", "--probes", "p.jsonl", "--out", "k.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("k.json")).unwrap()).unwrap();
    let kappa = report["kappa"].as_f64().unwrap();
    assert!((kappa - 10.0).abs() < 0.5, "{kappa}");
    assert!((report["youngs"].as_f64().unwrap() - 8000.0).abs() < 80.0);
}

#[test]
fn reconstruct_reports_noiseless_modulus() {
    let dir = tempfile::tempdir().unwrap();
    palpate(dir.path(), &["simulate", "--samples", "60", "--seed", "3", "--out", "p.jsonl"]);
    let out = palpate(
        dir.path(),
        &["reconstruct", "--probes", "p.jsonl", "--out", "f.toml", "--grid-n", "40", "--grid-side", "0.3"],
    );
    assert!(matches!(out.status.code(), Some(0) | Some(2)));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("f.toml.report.json")).unwrap()).unwrap();
    let e = report["estimate"]["youngs"].as_f64().unwrap();
    assert!((e - 8000.0).abs() < 8.0, "{e}");
    assert_eq!(report["reinit"]["converged"].as_bool(), Some(out.status.code() == Some(0)));
}
