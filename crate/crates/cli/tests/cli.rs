use std::path::Path;
use std::process::{Command, Output};

fn sgce(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgce"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = sgce(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn run_pll_is_reproducible_from_seed_and_from_result_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["--out-dir", "g", "--seed", "11", "gen-game"]);
    ok(d, &["--out-dir", "a", "--seed", "5", "run-pll", "--spec", "g/spec.json"]);
    ok(d, &["--out-dir", "b", "--seed", "5", "run-pll", "--spec", "g/spec.json"]);
    ok(d, &["--out-dir", "c", "--config", "a/result.json", "run-pll"]);
    let a = std::fs::read(d.join("a/result.json")).unwrap();
    assert_eq!(a, std::fs::read(d.join("b/result.json")).unwrap());
    assert_eq!(a, std::fs::read(d.join("c/result.json")).unwrap());
    assert_eq!(
        std::fs::read(d.join("a/events.jsonl")).unwrap(),
        std::fs::read(d.join("b/events.jsonl")).unwrap()
    );
    let r = read_json(&d.join("a/result.json"));
    assert_eq!(r["config"]["seed"], 5);
    assert_eq!(r["config"]["preset"], "desk");
    assert!(r["config"]["overrides"]["min_block_rounds"].is_u64());
}

#[test]
fn verify_reproduces_stored_epsilon_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["--out-dir", "g", "--seed", "2", "gen-game", "--states", "3"]);
    ok(d, &["--out-dir", "b", "run-bill", "--spec", "g/spec.json"]);
    ok(d, &["--out-dir", "v", "verify", "--spec", "g/spec.json", "--distribution", "b/distribution.json"]);
    let run = read_json(&d.join("b/result.json"));
    let check = read_json(&d.join("v/result.json"));
    let bits = |v: &serde_json::Value| v.as_f64().unwrap().to_bits();
    assert_eq!(bits(&run["metrics"]["efce_epsilon"]), bits(&check["metrics"]["efce_epsilon"]));
    assert_eq!(bits(&run["metrics"]["nfcce_epsilon"]), bits(&check["metrics"]["nfcce_epsilon"]));
}

#[test]
fn bundled_formula_reduces_to_value_one() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["--out-dir", "r", "reduce-sat"]);
    let r = read_json(&dir.path().join("r/result.json"));
    assert_eq!(r["metrics"]["best_value"], 1.0);
    assert_eq!(r["metrics"]["satisfiable"], true);
    assert_eq!(r["metrics"]["extracted_fraction"], 1.0);
    let mdps = read_json(&dir.path().join("r/mdps.json"));
    assert_eq!(mdps.as_array().unwrap().len(), 6 * r["metrics"]["clauses"].as_u64().unwrap() as usize);
}

#[test]
fn exit_codes_follow_error_classes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["--out-dir", "g", "gen-game"]);
    std::fs::write(d.join("bad.json"), r#"{"preset": "desk", "overrides": {"no_such_constant": 1}}"#).unwrap();
    let out = sgce(d, &["--config", "bad.json", "run-pll", "--spec", "g/spec.json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = sgce(d, &["--epsilon", "0", "run-pll", "--spec", "g/spec.json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = sgce(d, &["run-pll", "--spec", "missing.json"]);
    assert_eq!(out.status.code(), Some(2));

    // 2^16 controller policies exceed the default class cap
    ok(d, &["--out-dir", "big", "gen-game", "--kind", "single-controller", "--states", "4", "--horizon", "4"]);
    let out = sgce(d, &["run-sc", "--spec", "big/spec.json"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));

    let clauses: String = (0..40).map(|k| format!("{} {} {} 0\n", k % 30 + 1, -((k + 7) % 30 + 1), (k + 13) % 30 + 1)).collect();
    std::fs::write(d.join("big.cnf"), format!("p cnf 30 40\n{clauses}")).unwrap();
    let out = sgce(d, &["reduce-sat", "--cnf", "big.cnf"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bench_writes_csv_series() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["--out-dir", "x", "--threads", "2", "bench", "--actions", "2", "--rounds", "500", "--seeds", "3", "--checkpoints", "5"]);
    let csv = std::fs::read_to_string(d.join("x/bench.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 5);
    assert!(csv.starts_with("actions,budget,seed,round,swap_regret"));
}

#[test]
fn pllsr_logs_identical_shared_indices() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["--out-dir", "g", "--seed", "8", "gen-game", "--kind", "fast-mixing", "--gamma", "0.3"]);
    ok(d, &["--out-dir", "s", "--trajectories", "150000", "run-pllsr", "--spec", "g/spec.json", "--variant", "fast"]);
    let r = read_json(&d.join("s/result.json"));
    assert_eq!(r["metrics"]["shared_indices_identical"], true);
    assert!(r["metrics"]["max_phase_two_tv"].as_f64().unwrap() < 0.02);
}
