//! End-to-end tests driving the compiled binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_quditsynth")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Workdir {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Workdir {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        Workdir { _dir: dir, root }
    }

    fn file(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }
}

#[test]
fn count_prints_table_entry() {
    let out = run(&["count", "--d", "3", "--n", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap().trim(), "285");
}

#[test]
fn count_per_k_and_csv() {
    let w = Workdir::new();
    let csv = w.file("counts.csv");
    let out = run(&[
        "count",
        "--d",
        "2",
        "--n",
        "3",
        "--per-k",
        "--csv",
        path_str(&csv),
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("40\n"), "got {text}");
    assert!(text.contains("k1 14"));
    assert!(text.contains("k2 13"));
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = csv_text.lines();
    assert_eq!(lines.next().unwrap(), "d,n,total,k0,k1,k2");
    assert_eq!(lines.next().unwrap(), "2,2,5,1,5,");
    assert_eq!(lines.next().unwrap(), "2,3,40,1,14,13");
}

#[test]
fn count_exceeds_32_bits_without_overflow() {
    let out = run(&["count", "--d", "3", "--n", "11"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.trim(), "18300682593");
}

#[test]
fn chain_counts() {
    let out = run(&["count", "--d", "3", "--n", "3", "--chain", "--per-k"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    // a(3,3,1) = 8, a(3,3,2) = 2 -> total 8 + 4 = 12
    assert!(text.starts_with("12\n"), "got {text}");
    assert!(text.contains("k0 3"));
    assert!(text.contains("k1 8"));
    assert!(text.contains("k2 2"));
}

#[test]
fn synth_verify_roundtrip() {
    let w = Workdir::new();
    let u = w.file("U.json");
    let circ = w.file("circ.json");

    let out = run(&[
        "random-unitary",
        "--dim",
        "8",
        "--seed",
        "7",
        "--d",
        "2",
        "--n",
        "3",
        "--out",
        path_str(&u),
    ]);
    assert!(out.status.success());

    let out = run(&[
        "synth",
        "--d",
        "2",
        "--n",
        "3",
        "--in",
        path_str(&u),
        "--out",
        path_str(&circ),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    // the stored circuit re-verifies from disk
    let out = run(&[
        "verify",
        "--unitary",
        path_str(&u),
        "--circuit",
        path_str(&circ),
        "--tol",
        "1e-9",
    ]);
    assert!(out.status.success());

    // and fails at an absurd tolerance with exit code 2
    let out = run(&[
        "verify",
        "--unitary",
        path_str(&u),
        "--circuit",
        path_str(&circ),
        "--tol",
        "1e-18",
    ]);
    assert_eq!(out.status.code(), Some(2));

    // machine-readable report
    let out = run(&[
        "verify",
        "--unitary",
        path_str(&u),
        "--circuit",
        path_str(&circ),
        "--json",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(report["pass"], serde_json::Value::Bool(true));
}

#[test]
fn synth_eigen_method() {
    let w = Workdir::new();
    let u = w.file("U.json");
    let circ = w.file("circ.json");
    run(&[
        "random-unitary", "--dim", "4", "--seed", "3", "--d", "2", "--n", "2", "--out",
        path_str(&u),
    ]);
    let out = run(&[
        "synth",
        "--d",
        "2",
        "--n",
        "2",
        "--in",
        path_str(&u),
        "--out",
        path_str(&circ),
        "--method",
        "eigen",
        "--tol",
        "1e-8",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn synth_identity_with_prune_is_empty() {
    let w = Workdir::new();
    let u = w.file("I.json");
    let circ = w.file("circ.json");
    let dim = 9;
    let entries: Vec<Vec<[f64; 2]>> = (0..dim)
        .map(|r| {
            (0..dim)
                .map(|c| [if r == c { 1.0 } else { 0.0 }, 0.0])
                .collect()
        })
        .collect();
    std::fs::write(
        &u,
        serde_json::to_string(&serde_json::json!({"entries": entries})).unwrap(),
    )
    .unwrap();
    let out = run(&[
        "synth", "--d", "3", "--n", "2", "--in", path_str(&u), "--out", path_str(&circ),
        "--prune",
    ]);
    assert!(out.status.success());
    let file: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&circ).unwrap()).unwrap();
    assert_eq!(file["gates"].as_array().unwrap().len(), 0);
}

fn write_random_state(path: &Path, d: usize, n: usize, seed: u64) {
    // deterministic pseudo-random amplitudes, normalized
    let dim = d.pow(n as u32);
    let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
    let mut next = || {
        x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((x >> 11) as f64 / (1u64 << 53) as f64) - 0.5
    };
    let amps: Vec<[f64; 2]> = (0..dim).map(|_| [next() + 0.1, next()]).collect();
    let norm: f64 = amps.iter().map(|[a, b]| a * a + b * b).sum::<f64>().sqrt();
    let amps: Vec<[f64; 2]> = amps.iter().map(|[a, b]| [a / norm, b / norm]).collect();
    std::fs::write(
        path,
        serde_json::to_string(&serde_json::json!({"d": d, "n": n, "entries": amps})).unwrap(),
    )
    .unwrap();
}

#[test]
fn statesynth_gate_count_and_simulation() {
    let w = Workdir::new();
    let psi = w.file("psi.json");
    let circ = w.file("circ.json");
    let result = w.file("result.json");
    write_random_state(&psi, 3, 3, 99);

    let out = run(&[
        "statesynth",
        "--d",
        "3",
        "--n",
        "3",
        "--in",
        path_str(&psi),
        "--out",
        path_str(&circ),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let file: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&circ).unwrap()).unwrap();
    assert_eq!(file["gates"].as_array().unwrap().len(), 13);

    // reduction direction plus a traced simulation for the oracle workflow
    let onto = w.file("onto.json");
    let out = run(&[
        "statesynth",
        "--d",
        "3",
        "--n",
        "3",
        "--in",
        path_str(&psi),
        "--out",
        path_str(&onto),
        "--onto",
        "000",
    ]);
    assert!(out.status.success());
    let out = run(&[
        "simulate",
        "--circuit",
        path_str(&onto),
        "--state",
        path_str(&psi),
        "--out",
        path_str(&result),
        "--trace",
    ]);
    assert!(out.status.success());
    let res: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&result).unwrap()).unwrap();
    assert_eq!(res["trace"].as_array().unwrap().len(), 13);
    let amp = &res["entries"][0];
    let mag = (amp[0].as_f64().unwrap().powi(2) + amp[1].as_f64().unwrap().powi(2)).sqrt();
    assert!((mag - 1.0).abs() < 1e-10);
}

#[test]
fn statesynth_schedule_prints_terms() {
    let w = Workdir::new();
    let psi = w.file("psi.json");
    let circ = w.file("circ.json");
    write_random_state(&psi, 3, 2, 4);
    let out = run(&[
        "--utf8",
        "statesynth",
        "--d",
        "3",
        "--n",
        "2",
        "--in",
        path_str(&psi),
        "--out",
        path_str(&circ),
        "--schedule",
    ]);
    assert!(out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("0\u{2663} -> *T"), "stderr: {err}");
    assert!(err.contains("1\u{2663} -> 1T"), "stderr: {err}");
    assert!(err.contains("\u{2663}\u{2663} -> T*"), "stderr: {err}");
}

#[test]
fn lower_multi_controlled_circuit() {
    let w = Workdir::new();
    let circ = w.file("circ.json");
    let lowered = w.file("lowered.json");
    // one doubly controlled increment on three qutrits
    let gate = serde_json::json!({
        "word": [2, 1, "T"],
        "matrix": [
            [[0.0,0.0],[0.0,0.0],[1.0,0.0]],
            [[1.0,0.0],[0.0,0.0],[0.0,0.0]],
            [[0.0,0.0],[1.0,0.0],[0.0,0.0]]
        ]
    });
    std::fs::write(
        &circ,
        serde_json::to_string(&serde_json::json!({"d": 3, "n": 3, "gates": [gate]})).unwrap(),
    )
    .unwrap();

    let out = run(&["lower", "--in", path_str(&circ), "--out", path_str(&lowered)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let file: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&lowered).unwrap()).unwrap();
    assert_eq!(file["ancillas"], 1);
    assert_eq!(file["n"], 3);
    for gate in file["gates"].as_array().unwrap() {
        let controls = gate["word"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|l| l.is_number())
            .count();
        assert!(controls <= 1, "lowered gate carries {controls} controls");
    }

    // ancilla budget below the requirement fails validation
    let out = run(&[
        "lower",
        "--in",
        path_str(&circ),
        "--out",
        path_str(&lowered),
        "--max-ancillas",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn validation_failures_exit_1() {
    let w = Workdir::new();
    let bad = w.file("bad.json");
    let out_path = w.file("out.json");
    std::fs::write(
        &bad,
        r#"{"entries": [[[2.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]}"#,
    )
    .unwrap();
    let out = run(&[
        "synth", "--d", "2", "--n", "1", "--in", path_str(&bad), "--out", path_str(&out_path),
    ]);
    assert_eq!(out.status.code(), Some(1));

    // dimension mismatch between flags and file
    let u = w.file("U.json");
    run(&["random-unitary", "--dim", "4", "--seed", "1", "--out", path_str(&u)]);
    let out = run(&[
        "synth", "--d", "3", "--n", "2", "--in", path_str(&u), "--out", path_str(&out_path),
    ]);
    assert_eq!(out.status.code(), Some(1));

    // missing file
    let out = run(&[
        "synth", "--d", "2", "--n", "1", "--in", "nope.json", "--out", path_str(&out_path),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn random_unitary_is_seeded() {
    let w = Workdir::new();
    let a = w.file("a.json");
    let b = w.file("b.json");
    run(&["random-unitary", "--dim", "5", "--seed", "11", "--out", path_str(&a)]);
    run(&["random-unitary", "--dim", "5", "--seed", "11", "--out", path_str(&b)]);
    assert_eq!(
        std::fs::read_to_string(&a).unwrap(),
        std::fs::read_to_string(&b).unwrap()
    );
}
