use std::io::Write;
use std::path::Path;
use std::process::{Command, Stdio};

use jordan_angles::cli::dispatch;
use serde_json::Value;
use tempfile::TempDir;

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn run(args: &[&str]) -> (i32, Value) {
    let out = dispatch(std::iter::once("jordan-angles").chain(args.iter().copied()));
    let json = if out.stdout.is_empty() {
        Value::Null
    } else {
        serde_json::from_str(&out.stdout).unwrap()
    };
    (out.code, json)
}

fn frames(dir: &TempDir) -> (String, String, String) {
    (
        write(dir, "l.txt", "1 0\n0 1\n0 0\n0 0\n"),
        write(dir, "m.txt", "1 0\n0 1\n1 0\n0 0.5\n"),
        write(dir, "n.txt", "# third frame\n1 1\n0 1\n0 2\n1 0\n"),
    )
}

#[test]
fn identical_frames_give_zero_angles() {
    let dir = TempDir::new().unwrap();
    let (l, _, _) = frames(&dir);
    for route in ["jordan", "projector", "gram"] {
        let (code, json) = run(&["angles", "--left", &l, "--right", &l, "--route", route]);
        assert_eq!(code, 0);
        let angles = json["result"]["angles"].as_array().unwrap();
        assert_eq!(angles.len(), 2);
        assert!(angles.iter().all(|a| a.as_f64().unwrap().abs() < 1e-12), "{route}");
        assert_eq!(json["command"], "angles");
        assert_eq!(json["version"]["report"], "1");
    }
}

#[test]
fn known_angle_in_radians_and_degrees() {
    let dir = TempDir::new().unwrap();
    let l = write(&dir, "l.txt", "1\n0\n");
    let m = write(&dir, "m.txt", "0.8\n0.6\n");
    let (code, json) = run(&["angles", "--left", &l, "--right", &m, "--degrees"]);
    assert_eq!(code, 0);
    let a = &json["result"]["angles"];
    assert!((a["radians"][0].as_f64().unwrap() - 0.6f64.asin()).abs() < 1e-11);
    assert!((a["degrees"][0].as_f64().unwrap() - 0.6f64.asin().to_degrees()).abs() < 1e-9);
}

#[test]
fn triangle_certificate_weights_sum_to_one() {
    let dir = TempDir::new().unwrap();
    let (l, m, n) = frames(&dir);
    let (code, json) = run(&["triangle", "--l", &l, "--m", &m, "--n", &n, "--certificate"]);
    assert_eq!(code, 0);
    assert_eq!(json["result"]["inside"], true);
    let total: f64 = json["result"]["certificate"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["weight"].as_f64().unwrap())
        .sum();
    assert!((total - 1.0).abs() <= 1e-9, "weights sum to {total}");
    assert!(json["result"]["certificate_error"].as_f64().unwrap() <= 1e-7);
}

#[test]
fn distance_reports_each_norm() {
    let dir = TempDir::new().unwrap();
    let (l, m, _) = frames(&dir);
    let (code, json) = run(&[
        "distance", "--left", &l, "--right", &m, "--norm", "l2", "--norm", "ky-fan:1",
    ]);
    assert_eq!(code, 0);
    let text = json["result"].to_string();
    assert!(text.contains("ky-fan:1") && text.contains("l2"), "{text}");
}

#[test]
fn fuzz_is_reproducible() {
    let args = ["fuzz", "--space", "grassmann-complex", "--trials", "20", "--seed", "11"];
    let a = dispatch(std::iter::once("jordan-angles").chain(args));
    let b = dispatch(std::iter::once("jordan-angles").chain(args));
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    let json: Value = serde_json::from_str(&a.stdout).unwrap();
    assert!(json["result"]["checks"].as_array().is_some_and(|c| !c.is_empty()));
}

#[test]
fn usage_errors_exit_two() {
    let out = dispatch(["jordan-angles", "angles", "--bogus"]);
    assert_eq!(out.code, 2);
    assert!(!out.stderr.is_empty());
    let out = dispatch(["jordan-angles", "angles", "--left", "/nonexistent/frame.txt", "--right", "x"]);
    assert_eq!(out.code, 2);
}

#[test]
fn parse_errors_name_the_position() {
    let dir = TempDir::new().unwrap();
    let good = write(&dir, "good.txt", "1 0\n0 1\n0 0\n0 0\n");
    let ragged = write(&dir, "ragged.txt", "1 0\n0 1 2\n");
    let out = dispatch(["jordan-angles", "angles", "--left", &ragged, "--right", &good]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("line 2"), "{}", out.stderr);
}

#[test]
fn binary_reads_stdin_and_sets_exit_code() {
    let bin = env!("CARGO_BIN_EXE_jordan-angles");
    let dir = TempDir::new().unwrap();
    let (l, _, _) = frames(&dir);
    assert!(Path::new(bin).exists());
    let mut child = Command::new(bin)
        .args(["angles", "--left", "-", "--right", &l])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"0 0\n0 0\n1 0\n0 1\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    let angles = json["result"]["angles"].as_array().unwrap();
    assert!(angles
        .iter()
        .all(|a| (a.as_f64().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-11));

    let status = Command::new(bin).arg("no-such-command").output().unwrap().status;
    assert_eq!(status.code(), Some(2));
}
