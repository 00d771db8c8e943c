use std::path::Path;
use std::process::{Command, Output};

fn shocklab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shocklab")).args(args).current_dir(dir).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

const SHOCK: [&str; 8] = ["--rho-minus", "0.2", "--rho-plus", "0.8", "--t", "200", "--replicas", "40"];

#[test]
fn missing_density_is_a_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let o = shocklab(&["simulate", "--rho-minus", "0.2", "--t", "200", "--replicas", "5", "--out", "o"], d.path());
    assert_eq!(code(&o), 64);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--rho-plus"));
}

#[test]
fn zero_replicas_rejected() {
    let d = tempfile::tempdir().unwrap();
    let o = shocklab(
        &["simulate", "--rho-minus", "0.2", "--rho-plus", "0.8", "--t", "200", "--replicas", "0", "--out", "o"],
        d.path(),
    );
    assert_eq!(code(&o), 64);
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&shocklab(&["limit", "--bogus", "--out", "o"], d.path())), 64);
}

#[test]
fn simulate_is_deterministic_and_replayable() {
    let d = tempfile::tempdir().unwrap();
    for (out, workers) in [("a", "1"), ("b", "3")] {
        let mut args = vec!["simulate"];
        args.extend(SHOCK);
        args.extend(["--seed", "7", "--out", out, "--workers", workers]);
        assert_eq!(code(&shocklab(&args, d.path())), 0);
    }
    let o = shocklab(&["simulate", "--from-manifest", "a/manifest.txt", "--out", "c", "--workers", "2"], d.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["records.csv", "ecdf.csv", "manifest.txt"] {
        let a = std::fs::read(d.path().join("a").join(f)).unwrap();
        assert_eq!(a, std::fs::read(d.path().join("b").join(f)).unwrap(), "{f}");
        assert_eq!(a, std::fs::read(d.path().join("c").join(f)).unwrap(), "{f}");
    }
    let header = std::fs::read_to_string(d.path().join("a/records.csv")).unwrap();
    assert!(header.starts_with("replica,t,observable,value\n"));
}

fn exact_rows(dir: &Path) -> Vec<(i64, f64)> {
    std::fs::read_to_string(dir.join("exact.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let v: Vec<&str> = l.split(',').collect();
            (v[0].parse().unwrap(), v[1].parse().unwrap())
        })
        .collect()
}

#[test]
fn exact_one_particle_is_poisson() {
    let d = tempfile::tempdir().unwrap();
    let o =
        shocklab(&["exact", "--positions", "0", "--t", "2", "--a-min", "-1", "--a-max", "3", "--out", "e"], d.path());
    assert_eq!(code(&o), 0);
    let rows = exact_rows(&d.path().join("e"));
    // P(Poisson(2) > a)
    let pmf = |k: i32| (-2.0f64).exp() * 2f64.powi(k) / (1..=k).product::<i32>().max(1) as f64;
    for (a, p) in rows {
        let tail = 1.0 - (0..=a as i32).map(pmf).sum::<f64>();
        assert!((p - tail).abs() < 1e-10, "a = {a}: {p} vs {tail}");
    }
    assert!(d.path().join("e/manifest.txt").exists());
}

#[test]
fn exact_at_time_zero_is_an_indicator() {
    let d = tempfile::tempdir().unwrap();
    let o = shocklab(
        &["exact", "--positions", "3,1,-2", "--t", "0", "--a-min", "-5", "--a-max", "5", "--out", "e"],
        d.path(),
    );
    assert_eq!(code(&o), 0);
    for (a, p) in exact_rows(&d.path().join("e")) {
        assert_eq!(p, if -2 > a { 1.0 } else { 0.0 });
    }
}

#[test]
fn limit_table_and_flagging() {
    let d = tempfile::tempdir().unwrap();
    let o = shocklab(&["limit", "--s-min", "-8", "--s-max", "6", "--step", "2", "--out", "l"], d.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(d.path().join("l/f_w.csv")).unwrap();
    assert!(text.starts_with("# w=0\n"));
    assert!(text.contains("s,F,error_estimate\n"));
    // a range that misses both tails is not a valid CDF table
    let o = shocklab(&["limit", "--s-min", "-1", "--s-max", "1", "--step", "1", "--out", "m"], d.path());
    assert_eq!(code(&o), 3);
}

#[test]
fn verify_degenerate_wedge() {
    let d = tempfile::tempdir().unwrap();
    let o = shocklab(
        &[
            "verify",
            "--rho-minus",
            "0",
            "--rho-plus",
            "1",
            "--t",
            "200",
            "--replicas",
            "10",
            "--target",
            "gaussian",
            "--out",
            "v",
        ],
        d.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(d.path().join("v/comparison.csv").exists());
}

#[test]
fn verify_statistical_failure_exit_code() {
    // forty replicas at t = 200 are far from the limit at this tolerance
    let d = tempfile::tempdir().unwrap();
    let mut args = vec!["verify"];
    args.extend(SHOCK);
    args.extend(["--ks-max", "0.001", "--target", "gaussian", "--out", "v"]);
    assert_eq!(code(&shocklab(&args, d.path())), 2);
}

#[test]
fn verify_exact_criterion() {
    let d = tempfile::tempdir().unwrap();
    let o = shocklab(&["verify", "--criteria", "1", "--out", "r"], d.path());
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("criterion 1 [PASS]"));
}
