use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn qot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qot")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = qot(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn adder_path() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("circuits/adder8.txt").display().to_string()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn oneshot_transcript_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let mut logs = Vec::new();
    for i in 0..2 {
        let log = dir.path().join(format!("t{i}.log"));
        let out = dir.path().join(format!("o{i}.csv"));
        ok(&[
            "run-oneshot-ot",
            "-n",
            "4",
            "--seed",
            "7",
            "--log",
            log.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        logs.push((fs::read(&log).unwrap(), fs::read(&out).unwrap()));
    }
    assert_eq!(logs[0], logs[1]);
    let text = String::from_utf8(logs[0].0.clone()).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains(",send:")).count(), 1);
}

#[test]
fn thousand_honest_runs_are_all_correct() {
    for variant in ["nqsm_2msg", "oneshot_tlp"] {
        let csv = ok(&["run-ot", "-n", "4", "--variant", variant, "--trials", "1000", "--seed", "3"]);
        let rows = rows(&csv);
        assert_eq!(rows.len(), 1000);
        assert!(rows.iter().all(|r| r[9] == "1"));
    }
}

#[test]
fn missing_n_is_a_usage_error() {
    let out = qot(&["run-ot", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("'n'"));
}

#[test]
fn missing_seed_is_a_usage_error() {
    assert_eq!(qot(&["run-ot", "-n", "4"]).status.code(), Some(2));
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "n = 4\nseed = 1\nwidget = 3\n").unwrap();
    let out = qot(&["run-ot", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("widget"));
}

#[test]
fn flags_override_the_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# bqsm run\nn = 6\nseed = 1\nvariant = bqsm_2msg\nbqsm.memory_bound = 2\n").unwrap();
    let a = ok(&["run-ot", "--config", cfg.to_str().unwrap()]);
    assert_eq!(rows(&a)[0][2], "6");
    let b = ok(&["run-ot", "--config", cfg.to_str().unwrap(), "-n", "4", "--m", "3"]);
    assert_eq!(rows(&b)[0][2], "4");
    let c = qot(&["run-ot", "--config", cfg.to_str().unwrap(), "--set", "bqsm.memory_bound=9"]);
    assert_eq!(c.status.code(), Some(2));
}

#[test]
fn spectra_table_columns() {
    let csv = ok(&["spectra", "--seed", "0"]);
    assert!(csv.starts_with("N,alpha,i_alpha,lmax_star"));
    let rows = rows(&csv);
    assert_eq!(rows.len(), 9);
    for r in &rows {
        let n: f64 = r[0].parse().unwrap();
        let star: f64 = r[3].parse().unwrap();
        assert!((star - n / 2.0).abs() < 1e-9);
        assert_eq!(r[8], "true");
    }
    let eight = rows.iter().find(|r| r[0] == "8").unwrap();
    assert_eq!(eight[4].parse::<f64>().unwrap(), 17.5);
    let three = rows.iter().find(|r| r[0] == "3").unwrap();
    let i_alpha: f64 = three[2].parse().unwrap();
    assert!(i_alpha <= three[7].parse::<f64>().unwrap() + 1e-9);
}

#[test]
fn spectra_beyond_cap_is_a_capacity_error() {
    let out = qot(&["spectra", "--seed", "0", "--n-max", "11"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
}

#[test]
fn sdc_attack_with_leaked_indices_always_wins() {
    let csv = ok(&["attack-sim", "--attack", "sdc", "-n", "4", "--trials", "2000", "--seed", "1"]);
    assert_eq!(rows(&csv)[0][7], "1.000000");
}

#[test]
fn decohered_delay_attack_is_a_coin_pair() {
    let csv = ok(&[
        "attack-sim",
        "--attack",
        "delay",
        "-n",
        "4",
        "--rate",
        "0.05",
        "--tau-ticks",
        "10",
        "--trials",
        "20000",
        "--seed",
        "2",
    ]);
    let p: f64 = rows(&csv)[0][7].parse().unwrap();
    assert!((p - 0.25).abs() < 3.0 * (0.25f64 * 0.75 / 20000.0).sqrt());
}

#[test]
fn attack_csv_is_deterministic() {
    let args = ["attack-sim", "--attack", "subset", "-n", "4,8", "--m", "2", "--trials", "5000", "--seed", "9"];
    assert_eq!(ok(&args), ok(&args));
}

#[test]
fn run_2pc_on_the_adder() {
    let adder = adder_path();
    for backend in ["ideal", "quantum_sim"] {
        let csv = ok(&[
            "run-2pc",
            "--circuit",
            &adder,
            "--garbler-input",
            "17",
            "--evaluator-input",
            "2d",
            "--backend",
            backend,
            "--seed",
            "4",
        ]);
        let row = &rows(&csv)[0];
        assert_eq!(row[2], "44");
        assert_eq!(row[6], "1");
        assert_eq!(row[7], "pass");
    }
}

#[test]
fn run_2pc_rejects_oversized_input() {
    let out = qot(&[
        "run-2pc",
        "--circuit",
        &adder_path(),
        "--garbler-input",
        "100",
        "--evaluator-input",
        "0",
        "--seed",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tlp_bench_primary_output_excludes_timing() {
    let dir = TempDir::new().unwrap();
    let timing = dir.path().join("timing.csv");
    let args =
        ["tlp-bench", "--seed", "5", "--taus", "1,10,1000", "--repeats", "1", "--timing-out", timing.to_str().unwrap()];
    let a = ok(&args);
    assert_eq!(a, ok(&args));
    let rows = rows(&a);
    for (r, tau) in rows.iter().zip(["1", "10", "1000"]) {
        assert_eq!(r[0], tau);
        assert_eq!(r[2], tau);
        assert_eq!(r[4], "1");
    }
    assert!(fs::read_to_string(&timing).unwrap().starts_with("tau,seconds_min"));
}
