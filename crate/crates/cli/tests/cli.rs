use std::process::{Command, Output};

fn qmkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmkit")).args(args).env_remove("QMKIT_THREADS").output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = qmkit(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    serde_json::from_str(&stdout(args)).expect("valid JSON")
}

#[test]
fn shor_fifteen_reports_three_and_five() {
    let v = json(&["shor", "15", "--seed", "1"]);
    assert_eq!(v["toolkit"], "qmkit");
    assert_eq!(v["schema"], 1);
    assert_eq!(v["subcommand"], "shor");
    assert_eq!(v["seed"], 1);
    assert_eq!(v["params"]["n"], 15);
    assert_eq!(v["summary"]["factors"], serde_json::json!([3, 5]));
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(keys.last().map(|s| s.as_str()), Some("summary"));
    let summary: Vec<&String> = v["summary"].as_object().unwrap().keys().collect();
    assert_eq!(summary.last().map(|s| s.as_str()), Some("factors"));
}

#[test]
fn bell_default_angles_give_maximal_violation() {
    let text = stdout(&["bell", "--angles", "0,45,90,-45"]);
    assert!(text.contains("\"chsh\": 2.8284271247461903"), "{text}");
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["summary"]["violation"], true);
}

#[test]
fn ab_sweep_csv_header_and_first_row() {
    let text = stdout(&["ab-flux-sweep", "--L", "6.28", "--n", "-3..3", "--flux", "0..2π/64"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], format!("# qmkit {} schema 1", env!("CARGO_PKG_VERSION")));
    assert_eq!(lines[1], "# subcommand: ab-flux-sweep");
    assert!(lines.contains(&"# param n = -3..3"));
    assert!(lines.contains(&"# seed: 1729"));
    let header = lines.iter().position(|l| l.starts_with("flux,")).unwrap();
    assert_eq!(lines[header], "flux,E[n=-3],E[n=-2],E[n=-1],E[n=0],E[n=1],E[n=2],E[n=3],ground_n,ground_current");
    let first: Vec<f64> = lines[header + 1].split(',').map(|s| s.parse().unwrap()).collect();
    #[allow(clippy::approx_constant)]
    let e1 = 0.5 * (2.0 * std::f64::consts::PI / 6.28f64).powi(2);
    assert_eq!(first[0], 0.0);
    assert_eq!(first[4], 0.0);
    assert!((first[5] - e1).abs() < 1e-15);
    assert_eq!(lines.len() - header - 1, 65);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_threads() {
    for args in [
        &["shor", "21", "--seed", "5", "--exact"][..],
        &["ring-spectrum", "--flux", "0,0.5,1,1.5,2", "--emax", "20", "--grid", "4000"][..],
        &["lz", "--format", "json"][..],
    ] {
        let a = qmkit(args);
        let b = Command::new(env!("CARGO_BIN_EXE_qmkit")).args(args).env("QMKIT_THREADS", "3").output().unwrap();
        let c = Command::new(env!("CARGO_BIN_EXE_qmkit")).args(args).env("QMKIT_THREADS", "1").output().unwrap();
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.stdout, c.stdout, "{args:?}");
    }
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["zeeman", "--bogus"][..],
        &["bell", "--angles", "1,2"][..],
        &["cg", "--j1", "0.3"][..],
        &["fabry-perot", "--g", "1.5"][..],
        &["zeeman", "--h", "0..1"][..],
        &[][..],
    ] {
        let out = qmkit(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(!err.trim().is_empty());
    }
    let out = Command::new(env!("CARGO_BIN_EXE_qmkit")).args(["rabi"]).env("QMKIT_THREADS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exhausted_retries_exit_with_one_and_keep_transcript() {
    let out = qmkit(&["shor", "15", "--retries", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["summary"]["factors"], serde_json::Value::Null);
    assert!(String::from_utf8_lossy(&out.stderr).contains("retries"));
}

#[test]
fn help_and_version_succeed() {
    assert!(stdout(&["--help"]).contains("ab-flux-sweep"));
    assert!(stdout(&["--version"]).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn list_names_every_subcommand() {
    let v = json(&["list"]);
    let rows = v["tables"]["experiments"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 21);
    assert!(rows.iter().any(|r| r[0] == "gamow" && r[1] == "The Gamow Formula"));
    let help = stdout(&["--help"]);
    for r in rows {
        assert!(help.contains(r[0].as_str().unwrap()), "{}", r[0]);
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("qmkit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("rsa.csv");
    let printed = stdout(&["rsa", "--format", "csv", "--messages", "0..32"]);
    assert!(stdout(&["rsa", "--format", "csv", "--messages", "0..32", "--out", path.to_str().unwrap()]).is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(printed, written);
    assert!(written.contains("\nb,7\n"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn every_subcommand_runs_with_defaults() {
    for sub in [
        "cg", "zeeman", "rotate", "rabi", "lz", "gamow", "network", "fabry-perot", "sphere-xsec", "phase-shifts", "born",
        "dimer", "bell", "schmidt", "rsa", "qft-demo",
    ] {
        let v = json(&[sub, "--format", "json"]);
        assert_eq!(v["subcommand"], sub);
        assert!(!v["tables"].as_object().unwrap().is_empty(), "{sub}");
    }
}
