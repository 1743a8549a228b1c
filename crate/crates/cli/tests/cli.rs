use std::fs;
use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

fn srpat(args: &[&str], out: &Path, env: &[(&str, &str)]) -> (i32, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_srpat"));
    cmd.args(args).arg("--out").arg(out).env_remove("SRPAT_JOBS").env_remove("SOURCE_DATE_EPOCH");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let o = cmd.output().unwrap();
    (o.status.code().unwrap(), String::from_utf8_lossy(&o.stderr).into_owned())
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

fn same_files(a: &Path, b: &Path, names: &[&str]) {
    for n in names {
        assert_eq!(fs::read(a.join(n)).unwrap(), fs::read(b.join(n)).unwrap(), "{n} differs");
    }
}

const SIM: &[&str] = &["simulate", "--t-max", "1000", "--track", "1,2", "--replicas", "8", "--seed", "7", "--sampler", "fast"];

#[test]
fn simulate_is_byte_identical_across_runs_and_jobs() {
    let tmp = TempDir::new().unwrap();
    let dirs: Vec<_> = (0..4).map(|k| tmp.path().join(k.to_string())).collect();
    assert_eq!(srpat(&[SIM, &["--jobs", "1"]].concat(), &dirs[0], &[]).0, 0);
    assert_eq!(srpat(&[SIM, &["--jobs", "1"]].concat(), &dirs[1], &[]).0, 0);
    assert_eq!(srpat(&[SIM, &["--jobs", "4"]].concat(), &dirs[2], &[]).0, 0);
    assert_eq!(srpat(SIM, &dirs[3], &[("SRPAT_JOBS", "3")]).0, 0);
    for d in &dirs[1..] {
        same_files(&dirs[0], d, &["trajectory.csv", "histogram.csv", "manifest.json"]);
    }
    let traj = read(&dirs[0], "trajectory.csv");
    assert!(traj.starts_with("replica,vertex,t,degree,theta,alpha,alpha_star\n"));
    let manifest: serde_json::Value = serde_json::from_str(&read(&dirs[0], "manifest.json")).unwrap();
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["outputs"][0]["rows"].as_u64().unwrap() as usize, traj.lines().count() - 1);
    assert!(manifest.get("timestamp").is_none());
}

#[test]
fn replica_depends_only_on_seed_and_index() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let base = ["simulate", "--t-max", "500", "--track", "3", "--seed", "11", "--replicas"];
    srpat(&[&base[..], &["8"]].concat(), &a, &[]);
    srpat(&[&base[..], &["3"]].concat(), &b, &[]);
    let rows = |d: &Path| -> Vec<String> {
        read(d, "trajectory.csv").lines().skip(1).filter(|l| !l.starts_with("3,") && l.split(',').next().unwrap().parse::<u32>().unwrap() < 3).map(String::from).collect()
    };
    let (ra, rb) = (rows(&a), rows(&b));
    assert!(!ra.is_empty());
    assert_eq!(ra, rb);
}

#[test]
fn manifest_command_line_reproduces_run() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(srpat(&["pat", "--t-max", "300", "--delta", "-0.5", "--seed", "3", "--replicas", "2"], &a, &[]).0, 0);
    let manifest: serde_json::Value = serde_json::from_str(&read(&a, "manifest.json")).unwrap();
    let argv: Vec<String> = manifest["command_line"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
    assert_eq!(&argv[argv.len() - 2..], ["--out", "<out>"]);
    let args: Vec<&str> = argv[1..argv.len() - 2].iter().map(String::as_str).collect();
    assert_eq!(srpat(&args, &b, &[]).0, 0);
    same_files(&a, &b, &["trajectory.csv", "histogram.csv", "manifest.json"]);
}

#[test]
fn timestamp_comes_from_source_date_epoch() {
    let tmp = TempDir::new().unwrap();
    srpat(&["crossover", "--i-max", "3"], tmp.path(), &[("SOURCE_DATE_EPOCH", "1700000000")]);
    let manifest: serde_json::Value = serde_json::from_str(&read(tmp.path(), "manifest.json")).unwrap();
    assert_eq!(manifest["timestamp"], 1_700_000_000u64);
}

#[test]
fn beta_and_crossover_rows() {
    let tmp = TempDir::new().unwrap();
    let (b, c) = (tmp.path().join("b"), tmp.path().join("c"));
    assert_eq!(srpat(&["beta", "--i", "2", "--t-max", "100"], &b, &[]).0, 0);
    let beta = read(&b, "beta.csv");
    let rows: Vec<Vec<&str>> = beta.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["i", "t", "beta", "x_t"]);
    assert_eq!(rows.len(), 1 + 99);
    assert_eq!((rows[1][1], rows[1][2].parse::<f64>().unwrap()), ("2", 2.0));
    assert!((rows[2][2].parse::<f64>().unwrap() - 21.0 / 13.0).abs() < 1e-15);

    assert_eq!(srpat(&["crossover", "--i-max", "100"], &c, &[]).0, 0);
    let cross = read(&c, "crossover.csv");
    let mut lines = cross.lines();
    assert_eq!(lines.next(), Some("i,T_i"));
    assert_eq!(lines.next(), Some("1,1"));
    assert_eq!(cross.lines().count(), 101);
}

#[test]
fn bounds_sa_verify_and_fit() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    assert_eq!(srpat(&["bounds", "--i", "1,2", "--t-max", "10000"], &d.join("b"), &[]).0, 0);
    let bounds = read(&d.join("b"), "bounds.csv");
    assert!(bounds.starts_with("i,t,mean_exact,upper_bound,gamma_t\n1,1,1.0000000000000000e0,1.0000000000000000e0,"));

    assert_eq!(srpat(&["sa-verify", "--windows", "1000,2000", "--replicas", "2", "--seed", "5"], &d.join("s"), &[]).0, 0);
    let sa = read(&d.join("s"), "sa_window.csv");
    assert!(sa.starts_with("t0,t1,sup_dev,bound,K,C,sum_a_sq,sup_zeta_dev,err_sum\n1000,2000,"));
    assert_eq!(sa.lines().count(), 5);

    srpat(&["simulate", "--t-max", "20000", "--track", "1", "--replicas", "6", "--seed", "2"], &d.join("t"), &[]);
    let input = d.join("t").join("trajectory.csv");
    let input = input.to_str().unwrap();
    assert_eq!(srpat(&["fit", "--input", input, "--window", "100,20000"], &d.join("f"), &[]).0, 0);
    let fit = read(&d.join("f"), "fit.csv");
    let row: Vec<&str> = fit.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[4..], ["100", "20000", "6"]);
    let slope: f64 = row[1].parse().unwrap();
    assert!((slope - 0.618).abs() < 0.15, "slope {slope}");
}

#[test]
fn validation_errors_exit_one() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let cases: &[&[&str]] = &[
        &["simulate", "--t-max", "3000000000"],
        &["simulate", "--t-max", "200000", "--sampler", "naive"],
        &["simulate", "--t-max", "100", "--track", "0"],
        &["simulate", "--t-max", "100", "--snapshots", "list:5,3,100"],
        &["simulate", "--t-max", "100", "--snapshots", "geometric:0.5"],
        &["simulate", "--t-max", "100", "--sampler", "slow"],
        &["simulate", "--t-max", "100", "--unknown-flag", "1"],
        &["pat", "--t-max", "100", "--delta", "-1"],
        &["beta", "--i", "0", "--t-max", "10"],
        &["crossover"],
        &["sa-verify", "--windows", "200000"],
        &["fit", "--input", "/nonexistent/trajectory.csv"],
    ];
    for args in cases {
        let (code, err) = srpat(args, &d.join("x"), &[]);
        assert_eq!(code, 1, "{args:?}: {err}");
    }
    fs::write(d.join("bad.csv"), "a,b\n1,2\n").unwrap();
    let (code, err) = srpat(&["fit", "--input", d.join("bad.csv").to_str().unwrap()], &d.join("y"), &[]);
    assert_eq!(code, 1);
    assert!(err.contains("expected columns replica,vertex,t"), "{err}");
}

#[test]
fn iteration_cap_is_reported_not_guessed() {
    let tmp = TempDir::new().unwrap();
    let (code, err) = srpat(&["crossover", "--i", "50", "--cap", "100"], tmp.path(), &[]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("no crossover"), "{err}");
}
