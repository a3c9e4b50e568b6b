use std::path::PathBuf;
use std::process::{Command, Output};

fn netq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netq"))
        .args(args)
        .env_remove("NETQ_SEED")
        .output()
        .expect("netq runs")
}

fn config(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("../../configs");
    p.push(name);
    p.to_str().unwrap().to_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn validate_fork_join() {
    let out = netq(&["validate", &config("fig1.json")]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("n = 5\nM = 1\np = 2\nq = 2\n"), "{text}");
    assert!(text.contains("G0:\n  . . 0 . .\n  . . . . .\n  . . . . 0\n  . . . . 0\n  . . . . .\n"));
    assert!(text.contains("G1:\n  . . . 0 .\n  . . . 0 .\n"));
}

#[test]
fn validate_tandem() {
    let out = netq(&["validate", &config("tandem5.json")]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("n = 5\nM = 0\np = 4\nq = 4\n"));
    let out = netq(&["validate", &config("tandem10.json")]);
    assert!(stdout(&out).starts_with("n = 10\nM = 0\np = 9\nq = 9\n"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cyclic = dir.path().join("cyclic.json");
    std::fs::write(
        &cyclic,
        r#"{"n": 3, "arcs": [[1, 2], [2, 3], [3, 1]], "buffers": ["inf", 0, 0],
            "services": [{"type": "constant", "value": 1}, {"type": "constant", "value": 1},
                         {"type": "constant", "value": 1}]}"#,
    )
    .unwrap();
    let out = netq(&["validate", cyclic.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cycle 1 -> 2 -> 3 -> 1"));

    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "{\"n\": 2, \"colour\": 1}").unwrap();
    assert_eq!(netq(&["simulate", junk.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(netq(&["bounds", "/nonexistent/net.json"]).status.code(), Some(2));
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = netq(&[
            "simulate",
            &config("fig1.json"),
            "--cycles",
            "500",
            "--seed",
            "42",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let first = std::fs::read(&a).unwrap();
    assert_eq!(first, std::fs::read(&b).unwrap());

    let text = String::from_utf8(first).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,norm_x,lower_k,upper_k,gamma_hat"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 500);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[0], (i + 1).to_string());
        for field in &r[1..] {
            assert_eq!(field.split('.').nth(1).map(str::len), Some(6), "{field}");
        }
        let v: Vec<f64> = r[1..].iter().map(|f| f.parse().unwrap()).collect();
        assert!(v[1] <= v[0] && v[0] <= v[2]);
    }
}

#[test]
fn seed_from_environment() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_netq"));
        cmd.args(["simulate", &config("tandem5.json"), "--cycles", "20"]).args(extra);
        match env {
            Some(s) => cmd.env("NETQ_SEED", s),
            None => cmd.env_remove("NETQ_SEED"),
        };
        cmd.output().unwrap().stdout
    };
    assert_eq!(run(Some("9"), &[]), run(None, &["--seed", "9"]));
    assert_ne!(run(Some("9"), &[]), run(None, &["--seed", "10"]));
}

#[test]
fn replicas_add_column() {
    let out = netq(&["simulate", &config("tandem5.json"), "--cycles", "10", "--replicas", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("replica,k,norm_x,lower_k,upper_k,gamma_hat\n"));
    assert_eq!(text.lines().count(), 31);
    assert!(String::from_utf8_lossy(&out.stderr).contains("mean of 3 replicas"));
    assert_eq!(netq(&["simulate", &config("tandem5.json"), "--replicas", "0"]).status.code(), Some(2));
}

#[test]
fn bounds_output() {
    let out = netq(&["bounds", &config("fig1.json")]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "lower  = 1.000000\nupper  = 2.283333\nmethod = analytic\n");

    let out = netq(&["bounds", &config("tandem5.json"), "--simulate", "--cycles", "2000"]);
    let text = stdout(&out);
    let gamma: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("gamma_hat  = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((1.0..=2.283334).contains(&gamma), "{text}");
}

#[test]
fn reproduce_table_one_bounds_only() {
    let out = netq(&["reproduce", "--table", "1", "--cycles", "0", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 6);
    assert!(text.contains("1,1,1.000000,1.000000,2.283333,2.283333,analytic,"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn reproduce_table_three_reports_both_sizes() {
    let out = netq(&["reproduce", "--table", "3", "--cycles", "0"]);
    let text = stdout(&out);
    assert!(text.contains("10-node tandem"));
    assert!(text.contains("5-node tandem"));
    assert!(text.contains("| 1 | 1.000000 | 1.000000 | 2.283333 | 2.928968 |"));
    assert_eq!(netq(&["reproduce", "--table", "4"]).status.code(), Some(2));
}
