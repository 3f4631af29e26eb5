use std::process::Command;

use banditlab::harness::{bootstrap_ci, run_experiment, ExperimentConfig, MetricTable};
use banditlab::seeded;
use rand::Rng as _;

const BIN: &str = env!("CARGO_BIN_EXE_banditlab");

fn config(algo: &str) -> ExperimentConfig {
    ExperimentConfig::parse(&format!(
        "algo = {algo}\ninstance = multiple_best\nn = 50\nhorizon = 2000\ntrials = 3\nseed = 7"
    ))
    .unwrap()
}

fn trial_rows(table: &MetricTable, metric: &str, trial: u64) -> Vec<(u64, f64)> {
    table.rows.iter().filter(|r| r.metric == metric && r.trial == Some(trial)).map(|r| (r.t, r.value)).collect()
}

#[test]
fn same_config_writes_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    run_experiment(&config("mosspp")).unwrap().write(&a).unwrap();
    run_experiment(&config("mosspp")).unwrap().write(&b).unwrap();
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(!x.is_empty());
    assert_eq!(x, y);
}

#[test]
fn shared_seeds_pair_rows_by_trial() {
    let a = run_experiment(&config("moss")).unwrap();
    let b = run_experiment(&config("mosspp")).unwrap();
    for tr in 0..3 {
        let (ra, rb) = (trial_rows(&a, "regret", tr), trial_rows(&b, "regret", tr));
        assert!(!ra.is_empty());
        let ta: Vec<u64> = ra.iter().map(|r| r.0).collect();
        let tb: Vec<u64> = rb.iter().map(|r| r.0).collect();
        assert_eq!(ta, tb);
    }
    assert_eq!(a.finals("regret").len(), 3);
    assert_eq!(b.finals("regret").len(), 3);
}

#[test]
fn regret_rows_nondecreasing() {
    for algo in ["moss", "mosspp", "empmosspp", "parallel"] {
        let table = run_experiment(&config(algo)).unwrap();
        for tr in 0..3 {
            let rows = trial_rows(&table, "regret", tr);
            assert!(rows.windows(2).all(|w| w[0].0 < w[1].0 && w[1].1 >= w[0].1 - 1e-9), "{algo} trial {tr}");
        }
    }
}

#[test]
fn single_arm_single_round() {
    let cfg = ExperimentConfig::parse("algo = moss\ninstance = caption\nn = 1\nm = 1\nhorizon = 1\ntrials = 1").unwrap();
    let table = run_experiment(&cfg).unwrap();
    let rows = trial_rows(&table, "regret", 0);
    assert_eq!(rows, vec![(1, 0.0)]);
}

#[test]
fn bootstrap_coverage_near_level() {
    let mut rng = seeded(2024);
    let meta = 500;
    let mut hits = 0;
    for _ in 0..meta {
        let xs: Vec<f64> = (0..1000)
            .map(|_| {
                // Box-Muller
                let (u, v): (f64, f64) = (rng.random::<f64>().max(1e-300), rng.random());
                (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
            })
            .collect();
        let (lo, hi) = bootstrap_ci(&xs, 0.9, 1000, &mut rng).unwrap();
        if lo <= 0.0 && 0.0 <= hi {
            hits += 1;
        }
    }
    let cover = hits as f64 / meta as f64;
    assert!((0.85..=0.95).contains(&cover), "coverage {cover}");
}

#[test]
fn bootstrap_edge_cases() {
    let mut rng = seeded(1);
    assert_eq!(bootstrap_ci(&[0.3; 5], 0.9, 200, &mut rng).unwrap(), (0.3, 0.3));
    let (lo, hi) = bootstrap_ci(&[0.0, 1.0], 0.9, 500, &mut rng).unwrap();
    assert!(0.0 <= lo && lo <= hi && hi <= 1.0);
    assert!(bootstrap_ci(&[], 0.9, 10, &mut rng).is_err());
    assert!(bootstrap_ci(&[1.0, 2.0], 1.0, 10, &mut rng).is_err());
}

fn cli(args: &[&str]) -> String {
    let out = Command::new(BIN).args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn cli_run_is_deterministic() {
    let args = ["run", "--algo", "mosspp", "--instance", "multiple_best", "--T", "500", "--trials", "2", "--seed", "3", "--set", "n=40"];
    let a = cli(&args);
    assert_eq!(a, cli(&args));
    assert!(a.starts_with("# "));
    assert!(a.lines().any(|l| l == "trial,t,metric,value"), "{a}");
    assert!(a.contains(",regret,"));
}

#[test]
fn cli_gen_then_design_and_al() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.txt");
    let inst_s = inst.to_str().unwrap();
    cli(&["gen", "--kind", "intrinsic_dim", "--set", "d=4", "--set", "k=10", "--set", "dstar=2", "--seed", "5", "--out", inst_s]);
    let spanner = cli(&["design", "spanner", "--instance", inst_s]);
    let members = spanner.lines().find(|l| l.starts_with("members")).unwrap();
    assert_eq!(members.split_whitespace().count(), 5);
    let coeff: f64 = spanner
        .lines()
        .find_map(|l| l.strip_prefix("max_coefficient "))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(coeff <= 2.0 + 1e-9);

    let pool = dir.path().join("pool.txt");
    let pool_s = pool.to_str().unwrap();
    cli(&["gen", "--kind", "massart", "--set", "n=30", "--set", "cuts=5", "--seed", "2", "--out", pool_s]);
    let al = cli(&["al", "--pool", pool_s, "--epsilon", "0.05", "--seed", "4"]);
    let mut lines = al.lines();
    assert_eq!(lines.next(), Some("round,queried,chow_excess_running"));
    let last: Vec<f64> = al.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!(last[1] <= last[0]);
}

#[test]
fn cli_rejects_unknown_algorithm() {
    let out = Command::new(BIN).args(["run", "--algo", "nope", "--T", "10"]).output().unwrap();
    assert!(!out.status.success());
}
