use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use simdiag::statevec::StateVector;
use tempfile::TempDir;

const GOLDEN: &str = "# worked example\n1 YIXI\n1 IXIY\n1 XZYZ\n1 YZXZ\n1 XIYI\n1 IYIX\n1 ZXZY\n1 ZYZX\n";

fn simdiag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simdiag"))
        .args(args)
        .env_remove("SIMDIAG_THREADS")
        .env_remove("SIMDIAG_MAX_QUBITS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key)?.strip_prefix(" = "))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

#[test]
fn gen_is_deterministic_and_partitions_tfim_in_two() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("tfim.txt");
    let o = simdiag(&["gen", "--model", "tfim", "--qubits", "6", "--seed", "4", "--out", s(&file)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let again = simdiag(&["gen", "--model", "tfim", "--qubits", "6", "--seed", "4"]);
    assert_eq!(fs::read_to_string(&file).unwrap(), stdout(&again));

    let json = dir.path().join("groups.json");
    let o = simdiag(&["partition", s(&file), "--out", s(&json)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(field(&out, "m"), "21");
    assert_eq!(field(&out, "n_g"), "2");
    assert_eq!(field(&out, "group_sizes"), "15 6");
    let doc: Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(doc["n_g"], 2);
    assert_eq!(doc["groups"][1]["term_indices"].as_array().unwrap().len(), 6);
}

#[test]
fn partition_edge_cases() {
    let dir = TempDir::new().unwrap();
    let empty = write(&dir, "empty.txt", "# nothing\n\n");
    let o = simdiag(&["partition", s(&empty)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("error"));

    let one = write(&dir, "one.txt", "0.3 XYZ\n");
    let o = simdiag(&["partition", "--hamiltonian", s(&one)]);
    assert!(o.status.success());
    assert_eq!(field(&stdout(&o), "n_g"), "1");

    let o = simdiag(&["partition", s(&dir.path().join("missing.txt"))]);
    assert_eq!(o.status.code(), Some(2));

    let bad = write(&dir, "bad.txt", "1.0 XX\nabc YY\n");
    let o = simdiag(&["partition", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    // the file may be given once only
    let o = simdiag(&["partition", s(&one), "--hamiltonian", s(&one)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn diag_golden_example() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "golden.txt", GOLDEN);
    let o = simdiag(&["diag", "--hamiltonian", s(&file)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["n_groups"], 1);
    let g = &doc["groups"][0];
    let c = &g["circuit"];
    assert_eq!(c["h_pre"], serde_json::json!([2, 3]));
    assert_eq!(c["cnots"], serde_json::json!([[1, 3], [2, 3]]));
    assert_eq!(c["czs"], serde_json::json!([[0, 2], [1, 2], [1, 3]]));
    assert_eq!(c["s_layer"], serde_json::json!([0, 1]));
    assert_eq!(c["h_post"], serde_json::json!([0, 1, 2, 3]));
    let terms = g["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 8);
    let negative = terms.iter().filter(|t| t["signed_coeff"].as_f64() == Some(-1.0)).count();
    assert_eq!(negative, 4);
}

#[test]
fn diag_trivial_groups() {
    let dir = TempDir::new().unwrap();
    let z = write(&dir, "z.txt", "1 ZZI\n0.5 IZZ\n-2 ZIZ\n");
    let doc: Value = serde_json::from_str(&stdout(&simdiag(&["diag", s(&z)]))).unwrap();
    let c = &doc["groups"][0]["circuit"];
    for layer in ["h_pre", "cnots", "czs", "s_layer", "h_post"] {
        assert!(c[layer].as_array().unwrap().is_empty(), "{layer} not empty");
    }

    let x = write(&dir, "x.txt", "1 XXI\n0.5 IXX\n");
    let doc: Value = serde_json::from_str(&stdout(&simdiag(&["diag", s(&x)]))).unwrap();
    let c = &doc["groups"][0]["circuit"];
    for layer in ["cnots", "czs", "s_layer"] {
        assert!(c[layer].as_array().unwrap().is_empty(), "{layer} not empty");
    }
    let h_count = c["h_pre"].as_array().unwrap().len() + c["h_post"].as_array().unwrap().len();
    assert!(h_count > 0);
}

#[test]
fn run_with_zero_steps_leaves_state_alone() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "h.txt", "0.7 XI\n-0.4 ZZ\n0.2 IY\n");
    let dump = dir.path().join("psi.bin");
    let o = simdiag(&["run", s(&file), "--steps", "0", "--init", "plus", "--dump", s(&dump)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = stdout(&o);
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "step,time,energy");
    assert_eq!(rows.len(), 2);
    // <++|H|++> = 0.7
    let energy: f64 = rows[1].split(',').nth(2).unwrap().parse().unwrap();
    assert!((energy - 0.7).abs() < 1e-12);
    let psi = StateVector::load(&dump).unwrap();
    assert_eq!(psi.amplitudes(), StateVector::plus(2).unwrap().amplitudes());
}

#[test]
fn run_echoes_dt_and_writes_trace() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "h.txt", "0.7 XI\n-0.4 ZZ\n0.2 IY\n");
    let csv = dir.path().join("trace.csv");
    let o = simdiag(&["run", s(&file), "--t", "0.5", "--steps", "50", "--csv", s(&csv)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(field(&stderr(&o), "dt"), "0.01");
    let trace = fs::read_to_string(&csv).unwrap();
    assert_eq!(trace.lines().count(), 52);
    let last_time: f64 = trace.lines().last().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((last_time - 0.5).abs() < 1e-12);
    let norm: f64 = field(&stderr(&o), "norm").parse().unwrap();
    assert!((norm - 1.0).abs() < 1e-12);
}

#[test]
fn run_verify_on_random_ten_qubits() {
    let dir = TempDir::new().unwrap();
    let mut text = String::new();
    let letters = ['I', 'X', 'Y', 'Z'];
    let mut state = 12345u64;
    for k in 0..40 {
        let p: String = (0..10)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                letters[(state >> 60) as usize % 4]
            })
            .collect();
        text.push_str(&format!("{} {p}\n", 0.1 + 0.02 * k as f64));
    }
    let file = write(&dir, "rand.txt", &text);
    let o = simdiag(&["run", s(&file), "--t", "0.3", "--steps", "3", "--init", "random", "--seed", "2", "--verify"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let deficit: f64 = field(&stderr(&o), "fidelity_deficit").parse().unwrap();
    assert!(deficit < 1e-10, "{deficit}");
}

#[test]
fn run_refuses_more_qubits_than_the_cap() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "h.txt", "1 XXXXXX\n");
    let o = simdiag(&["--max-qubits", "4", "run", s(&file)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("limit of 4"), "{}", stderr(&o));
    let o = Command::new(env!("CARGO_BIN_EXE_simdiag"))
        .args(["run", s(&file)])
        .env("SIMDIAG_MAX_QUBITS", "5")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(simdiag(&["run"]).status.code(), Some(2));
    assert_eq!(simdiag(&["gen", "--model", "ising", "--qubits", "3"]).status.code(), Some(2));
    assert_eq!(simdiag(&["gen", "--model", "tfim", "--qubits", "1"]).status.code(), Some(2));
    assert_eq!(simdiag(&["bench", "--model", "tfim", "--qubits", "5-3"]).status.code(), Some(2));
}

#[test]
fn verify_and_bench() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "golden.txt", GOLDEN);
    let o = simdiag(&["verify", s(&file), "--steps", "4"]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    let out = stdout(&o);
    assert!(out.lines().all(|l| l.starts_with("PASS")), "{out}");
    assert!(out.contains("dense circuit check"));

    let o = simdiag(&["gen", "--model", "syk", "--qubits", "4"]);
    assert_eq!(field(&stderr(&o), "collisions"), "0");
    assert_eq!(stdout(&o).lines().count(), 70);

    let o = simdiag(&["--threads", "1", "bench", "--model", "syk", "--qubits", "3-4", "--repeats", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = stdout(&o);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 7);
    assert!(lines[0].starts_with("model,n_qubits,m,n_g,method"));
    assert!(lines[1..].iter().all(|l| l.starts_with("syk,") && l.ends_with(",1")));
}
