//! End-to-end tests of the memprobe binary: exit codes, output schema,
//! determinism, config round-trip.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_memprobe"))
}

fn run(args: &[&str]) -> Output {
    bin()
        .args(args)
        .env_remove("SEED")
        .output()
        .expect("spawn memprobe")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("memprobe-test-{}-{name}", std::process::id()));
    p
}

#[test]
fn column_schemas_are_stable() {
    // documented header of each subcommand, cheap parameter choices
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["spectrum", "--omega-points", "2"],
         "omega,g_spectrum,dg_dtau,is_critical,status"),
        (vec!["filter", "--filter", "hahn", "--t", "1", "--omega-points", "2"],
         "omega,filter_value,status"),
        (vec!["filter", "--filter", "narrowband", "--t", "1"],
         "harmonic,omega,weight,status"),
        (vec!["attenuation", "--t-points", "1"],
         "t,j,dj_dtau,p_plus,p_minus,rel_err_est,method,status"),
        (vec!["error-scan", "--t-points", "2"],
         "t,omega_ctrl,j,qfi,eps,status"),
        (vec!["optimal-time"], "t_opt,eps_min,t0,branch,status"),
        (vec!["critical-scan", "--x-points", "2"],
         "x,g,eps_min,t_opt,t0,t_ratio,branch,status"),
        (vec!["strategy", "--n-max", "2", "--gtc-points", "2"],
         "g_tau_c,n_star,eps_min,t_opt,status"),
        (vec!["crb", "--shots", "100", "--n-trials", "100", "--t", "23"],
         "t,shots,n_trials,empirical_rel_std,predicted_rel_err,ratio,mean_estimate,relative_bias,status"),
    ];
    for (args, header) in cases {
        let out = run(&args);
        assert!(out.status.success(), "args {args:?}");
        let text = stdout(&out);
        let got = text.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(got, header, "args {args:?}");
    }
}

#[test]
fn malformed_config_line_exits_2() {
    let path = tmp("broken.cfg");
    std::fs::write(&path, "beta 2\n").unwrap();
    let out = run(&["spectrum", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_file(&path).ok();
}

#[test]
fn spectrum_marks_critical_row() {
    let out = run(&["spectrum"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let critical: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && l.ends_with(",1,ok"))
        .collect();
    assert_eq!(critical.len(), 1, "exactly one critical row");
    let fields: Vec<&str> = critical[0].split(',').collect();
    let omega: f64 = fields[0].parse().unwrap();
    let dg: f64 = fields[2].parse().unwrap();
    assert!((omega - 1.0).abs() < 1e-12); // beta=2, tau_c=1
    assert!(dg.abs() < 1e-12);
}

#[test]
fn spectrum_single_point_at_zero() {
    let out = run(&["spectrum", "--omega-points", "1", "--omega-min", "0"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row = text
        .lines()
        .find(|l| !l.starts_with('#') && l.ends_with("ok"))
        .unwrap();
    let g_val: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    // G(0) = g^2 A_2 tau_c = 1/pi
    assert!((g_val - 1.0 / std::f64::consts::PI).abs() < 1e-12);
}

#[test]
fn invalid_beta_exits_2() {
    let out = run(&["spectrum", "--beta", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_config_key_exits_2() {
    let path = tmp("bad.cfg");
    std::fs::write(&path, "no_such_key = 1\n").unwrap();
    let out = run(&["spectrum", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_file(&path).ok();
}

#[test]
fn print_config_lists_resolved_values() {
    let out = run(&["critical-scan", "--print-config", "--x-points", "7"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("command = critical-scan"));
    assert!(text.contains("x_points = 7"));
    assert!(text.contains("seed = "));
    assert!(text.contains("tol = "));
}

#[test]
fn strategy_with_unit_budget_is_constant() {
    let out = run(&["strategy", "--n-max", "1", "--gtc-points", "6"]);
    assert!(out.status.success());
    for line in stdout(&out).lines().filter(|l| !l.starts_with('#')) {
        if line.starts_with("g_tau_c") {
            continue;
        }
        assert_eq!(line.split(',').nth(1), Some("1"), "line: {line}");
    }
}

#[test]
fn critical_scan_flips_once_and_is_deterministic() {
    let args = ["critical-scan", "--x-points", "24"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "reruns must be byte-identical");

    let text = stdout(&a);
    let branches: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && l.ends_with(",ok") && !l.starts_with('x'))
        .map(|l| l.split(',').nth(6).unwrap())
        .collect();
    assert_eq!(branches.len(), 24);
    let flips = branches.windows(2).filter(|w| w[0] != w[1]).count();
    assert_eq!(flips, 1, "branches: {branches:?}");
}

#[test]
fn jobs_flag_does_not_change_output() {
    let a = run(&["critical-scan", "--x-points", "12"]);
    let b = run(&["critical-scan", "--x-points", "12", "--jobs", "1"]);
    let ta = stdout(&a);
    let tb = stdout(&b);
    // bodies identical; metadata differs only in the jobs key
    let body = |s: &str| {
        s.lines()
            .filter(|l| !l.starts_with('#'))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(body(&ta), body(&tb));
}

#[test]
fn seed_env_is_honored_and_flag_wins() {
    let base = run(&[
        "crb",
        "--shots",
        "200",
        "--n-trials",
        "100",
        "--print-config",
    ]);
    assert!(stdout(&base).contains("seed = 20240811"));

    let from_env = bin()
        .args(["crb", "--print-config"])
        .env("SEED", "777")
        .output()
        .unwrap();
    assert!(stdout(&from_env).contains("seed = 777"));

    let flag_wins = bin()
        .args(["crb", "--print-config", "--seed", "888"])
        .env("SEED", "777")
        .output()
        .unwrap();
    assert!(stdout(&flag_wins).contains("seed = 888"));
}

#[test]
fn crb_runs_and_reproduces() {
    let args = ["crb", "--shots", "500", "--n-trials", "100", "--t", "23.0"];
    let a = run(&args);
    assert!(
        a.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&a.stderr)
    );
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let row = text.lines().last().unwrap();
    assert!(row.ends_with(",ok"));
    let ratio: f64 = row.split(',').nth(5).unwrap().parse().unwrap();
    assert!(ratio.is_finite() && ratio > 0.0);
}

#[test]
fn json_round_trip_reproduces_identical_run() {
    let json_path = tmp("scan.json");
    let first = run(&[
        "error-scan",
        "--t-points",
        "24",
        "--format",
        "json",
        "-o",
        json_path.to_str().unwrap(),
    ]);
    assert!(first.status.success());

    // re-feed the JSON artifact as the config, redirecting only the output
    let replay_path = tmp("scan-replay.json");
    let second = run(&[
        "error-scan",
        "--config",
        json_path.to_str().unwrap(),
        "-o",
        replay_path.to_str().unwrap(),
    ]);
    assert!(second.status.success());
    let original = std::fs::read_to_string(&json_path).unwrap();
    let replay = std::fs::read_to_string(&replay_path).unwrap();

    let mut v1: serde_json::Value = serde_json::from_str(&original).unwrap();
    let mut v2: serde_json::Value = serde_json::from_str(&replay).unwrap();
    assert_eq!(v1["rows"], v2["rows"]);
    // identical resolved config except the redirected output path
    v1["metadata"]["config"]["output"] = serde_json::Value::Null;
    v2["metadata"]["config"]["output"] = serde_json::Value::Null;
    assert_eq!(v1["metadata"]["config"], v2["metadata"]["config"]);
    std::fs::remove_file(&json_path).ok();
    std::fs::remove_file(&replay_path).ok();
}

#[test]
fn flat_config_file_is_parsed() {
    let path = tmp("flat.cfg");
    std::fs::write(&path, "# comment line\nbeta = 4\nx_points = 9\n").unwrap();
    let out = run(&[
        "critical-scan",
        "--config",
        path.to_str().unwrap(),
        "--print-config",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("beta = 4e0"));
    assert!(text.contains("x_points = 9"));
    std::fs::remove_file(&path).ok();
}

#[test]
fn error_scan_contains_infinite_sentinel_when_grid_hits_t0() {
    // t0 = pi*20 for beta=2, tau_c=1; put it on the grid exactly
    let t0 = std::f64::consts::PI * 20.0;
    let out = run(&[
        "error-scan",
        "--t-min",
        &format!("{t0}"),
        "--t-max",
        "1000",
        "--t-points",
        "50",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let first_row = text
        .lines()
        .find(|l| !l.starts_with('#') && !l.starts_with('t') && l.ends_with(",ok"))
        .unwrap();
    let eps = first_row.split(',').nth(4).unwrap();
    assert_eq!(eps, "inf");
}
