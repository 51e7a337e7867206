use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn oliver(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_oliver"))
        .args(args)
        .env_remove("OLIVER_CAP")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    if let Some(text) = stdin {
        child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
    }
    child.wait_with_output().unwrap()
}

fn export(name: &str) -> String {
    let out = oliver(&["corpus", name], None);
    assert!(out.status.success());
    String::from_utf8(out.stdout).unwrap()
}

fn report(args: &[&str], stdin: &str) -> (i32, Value) {
    let out = oliver(args, Some(stdin));
    let code = out.status.code().unwrap();
    (code, serde_json::from_slice(&out.stdout).unwrap_or(Value::Null))
}

#[test]
fn check_wreath3_standalone() {
    let (code, r) = report(&["check", "-", "--k", "3", "--json"], &export("wreath3"));
    assert_eq!(code, 0);
    assert_eq!(r["format"], "oliver-report v1");
    assert_eq!(r["results"]["holds"], true);
    assert_eq!(r["results"]["xk"]["order"], 27);
    assert_eq!(r["results"]["je"]["order"], 27);
    assert_eq!(r["results"]["je_equals_xk"], true);
}

#[test]
fn offenders_filtered() {
    let (code, r) = report(&["offenders", "-", "--quadratic", "--two-subnormal", "--json"], &export("ut3-5-natural"));
    assert_eq!(code, 0);
    let list = r["results"]["offenders"].as_array().unwrap();
    assert!(!list.is_empty());
    for o in list {
        assert_eq!(o["quadratic"], true);
        assert_eq!(o["two_subnormal"], true);
        assert!(o["defect"].as_i64().unwrap() >= 0);
    }
}

#[test]
fn monitors_jordan5() {
    let (code, r) = report(&["monitors", "-", "--json"], &export("jordan5-5"));
    assert_eq!(code, 0);
    let m = &r["monitors"][0];
    assert_eq!(m["monitor"], "class-bound");
    assert_eq!(m["applicable"], true);
    assert_eq!(m["fired"], false);
}

#[test]
fn mutation_exits_two_with_certificate() {
    let (code, r) = report(&["monitors", "-", "--json", "--corrupt-offender-check"], &export("jordan5-5"));
    assert_eq!(code, 2);
    let cert = &r["certificate"];
    assert_eq!(cert["kind"], "monitor");
    assert_eq!(cert["module_dim"], 5);
    assert!(!cert["offender"].as_array().unwrap().is_empty());
}

#[test]
fn json_input_accepted() {
    let text = oliver(&["corpus", "ut3-5-natural", "--json"], None).stdout;
    let (code, r) = report(&["xk", "-", "--k", "3", "--json"], std::str::from_utf8(&text).unwrap());
    assert_eq!(code, 0);
    assert_eq!(r["results"]["xk"]["order"], 15625);
}

#[test]
fn deterministic_across_threads() {
    let input = export("ut4-5-natural");
    let run = |threads: &str| {
        let out = oliver(&["two-subnormal", "-", "--json", "--no-timings", "--threads", threads], Some(&input));
        assert_eq!(out.status.code(), Some(0));
        out.stdout
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn usage_and_capacity_errors() {
    assert_eq!(oliver(&["frobnicate"], None).status.code(), Some(1));
    assert_eq!(oliver(&["check"], None).status.code(), Some(1));
    let bad = oliver(&["check", "-"], Some("oliver-input v1\np 4\n"));
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("line 2, column 3"));
    let (code, r) = report(&["xk", "-", "--cap", "100", "--json"], &export("ut3-5"));
    assert_eq!(code, 1);
    assert!(r["error"].as_str().unwrap().contains("cap"));
    let out = Command::new(env!("CARGO_BIN_EXE_oliver"))
        .args(["xk", "-", "--json"])
        .env("OLIVER_CAP", "100")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .and_then(|mut c| {
            c.stdin.take().unwrap().write_all(export("ut3-5").as_bytes())?;
            c.wait_with_output()
        })
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn every_command_runs_on_ut3_natural() {
    let input = export("ut3-5-natural");
    for cmd in [
        "check",
        "xk",
        "je",
        "baum",
        "offenders",
        "two-subnormal",
        "normalw",
        "replace-thompson",
        "replace-glauberman",
        "monitors",
    ] {
        let (code, r) = report(&[cmd, "-", "--json"], &input);
        assert_eq!(code, 0, "{cmd}: {r:#}");
        assert_eq!(r["command"], cmd);
    }
}
