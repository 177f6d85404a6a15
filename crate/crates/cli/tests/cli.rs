//! Exit-code contract and serialization fidelity of the command line.

use std::path::Path;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use alterproj::geometry;
use alterproj::instances;
use alterproj::schedules::ScheduleSpec;
use alterproj::schema;
use alterproj::vector::Vector;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_alterproj"))
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

const TWO_LINES: &str = r#"{
  "id": "two-lines",
  "dim": 2,
  "mode": "projection",
  "sets": [
    {"kind": "linear_subspace", "basis": [[1.0, 0.0]]},
    {"kind": "linear_subspace", "basis": [[0.7071067811865476, 0.7071067811865476]]}
  ],
  "certificate": "subspaces_with_known_intersection",
  "schedule": {"kind": "cyclic", "K": 2},
  "seed": 1
}"#;

#[test]
fn run_two_lines_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("inst.json");
    write(&cfg, TWO_LINES);
    let out = dir.path().join("out");
    let status = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--tol", "1e-9", "--checked"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let meta = schema::read_metadata(&out.join("metadata.json")).unwrap();
    assert!(meta.final_norm <= 1e-9);
    assert_eq!(meta.rng, "chacha8");
    let rows = schema::read_trace_csv(&out.join("trace.csv")).unwrap();
    assert_eq!(rows.len(), meta.steps);
    assert!(rows.windows(2).all(|w| w[1].norm <= w[0].norm + 1e-12));
}

#[test]
fn run_k1_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("inst.json");
    write(
        &cfg,
        r#"{
  "dim": 2,
  "mode": "projection",
  "sets": [{"kind": "linear_subspace", "basis": [[1.0, 0.0]]}],
  "certificate": "subspaces_with_known_intersection",
  "schedule": {"kind": "cyclic", "K": 1}
}"#,
    );
    let status = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn run_missing_config_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["run", "--config"])
        .arg(dir.path().join("nope.json"))
        .arg("--out")
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

/// Non-unit atoms break the step Pythagoras identity; checked mode must
/// catch the injected fault once validation is bypassed.
#[test]
fn fault_injection_checked_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("inst.json");
    write(
        &cfg,
        r#"{
  "id": "bad-atoms",
  "dim": 2,
  "mode": "greedy",
  "dictionaries": [
    {"kind": "finite", "atoms": [[1.3, 0.0], [-1.3, 0.0]]},
    {"kind": "finite", "atoms": [[0.0, 1.0], [0.0, -1.0]]}
  ],
  "certificate": "symmetric_dictionaries",
  "schedule": {"kind": "cyclic", "K": 2},
  "seed": 3
}"#,
    );
    // with validation the corrupted file never runs
    let status = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("a"))
        .arg("--checked")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    // without it, the per-step invariant fires
    let status = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("b"))
        .args(["--checked", "--no-validate", "--max-iter", "50"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn analyze_converged_run_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("inst.json");
    write(&cfg, TWO_LINES);
    let out = dir.path().join("out");
    assert_eq!(
        bin()
            .args(["run", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap()
            .code(),
        Some(0)
    );
    let status = bin()
        .args(["analyze", "--config"])
        .arg(out.join("metadata.json"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.join("report.json").exists());
}

#[test]
fn check_suites_exit_zero() {
    for (what, budget) in [("moreau", "100"), ("bridge", "10"), ("oracle", "100")] {
        let status = bin()
            .args(["check", what, "--budget", budget])
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0), "check {what} failed");
    }
}

/// An instance written and re-read projects identically on 100 random
/// points, for every set of every certificate class.
#[test]
fn instance_round_trip_identical_projections() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31337);
    for class in instances::SuiteClass::ALL {
        let inst = instances::standard_suite_instance(class, 3, 5).unwrap();
        let k = inst.k();
        let json = schema::instance_to_json(&inst, ScheduleSpec::Random { k, seed: 5 });
        let path = dir.path().join(format!("{}.json", class.name()));
        schema::write_instance(&path, &json).unwrap();
        let back = schema::read_instance(&path).unwrap();
        let sets: Vec<_> = match inst.mode {
            alterproj::engine::Mode::Projection => inst.sets.clone(),
            alterproj::engine::Mode::Greedy => inst
                .dictionaries
                .iter()
                .map(|d| alterproj::dictionaries::polar_cone_of_dictionary(d).unwrap())
                .collect(),
        };
        let back_sets: Vec<_> = match back.mode {
            alterproj::engine::Mode::Projection => back.core_sets(),
            alterproj::engine::Mode::Greedy => back
                .core_dictionaries()
                .iter()
                .map(|d| alterproj::dictionaries::polar_cone_of_dictionary(d).unwrap())
                .collect(),
        };
        for (a, b) in sets.iter().zip(&back_sets) {
            for _ in 0..100 {
                let x = Vector::new((0..inst.dim).map(|_| rng.gen_range(-5.0..5.0)).collect());
                let pa = geometry::project(a, &x).unwrap();
                let pb = geometry::project(b, &x).unwrap();
                assert!(
                    pa.as_slice()
                        .iter()
                        .zip(pb.as_slice())
                        .all(|(u, v)| u.to_bits() == v.to_bits()),
                    "{}: projections differ after round trip",
                    class.name()
                );
            }
        }
    }
}
