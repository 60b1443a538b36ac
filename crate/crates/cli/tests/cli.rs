use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_hormander"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    if let Some(text) = stdin {
        child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
    } else {
        drop(child.stdin.take());
    }
    child.wait_with_output().unwrap()
}

fn rotation_doc(theta: f64) -> String {
    let (s, c) = theta.sin_cos();
    format!(r#"{{"n": 1, "A": [[{c}]], "B": [[{}]], "C": [[{s}]], "D": [[{c}]]}}"#, -s)
}

fn doubled(entry: &Value) -> Option<i64> {
    entry.get("s").map(|s| s["doubled"].as_i64().unwrap())
}

#[test]
fn index_of_rotation_by_a_third_of_pi() {
    let out = run(&["index", "--k-max", "4", "--method", "formula"], Some(&rotation_doc(std::f64::consts::PI / 3.0)));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["v"], 1);
    assert!(doc["version"].is_string());
    assert_eq!(doc["seed"], 0);
    let results = doc["results"].as_array().unwrap();
    assert_eq!(results.len(), 4);
    assert_eq!(results.iter().map(doubled).collect::<Vec<_>>(), vec![Some(1), Some(1), None, Some(-1)]);
    assert_eq!(results[2]["error"]["kind"], "IterateDegenerate");
}

#[test]
fn index_methods_agree_on_a_rotation() {
    let out = run(&["index", "--k-max", "5", "--method", "all"], Some(&rotation_doc(1.0)));
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["agree"], true);
    assert_eq!(doc["results"].as_array().unwrap().len(), 15);
}

#[test]
fn malformed_input_exits_with_one() {
    let out = run(&["index"], Some(r#"{"n": 1, "A": [[1.0]]}"#));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("\"B\""));
    let out = run(&["index"], Some("{\"n\": 1,\n \"A\": [[1.0]],, }"));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    // Symplectic but not a return map: D ≠ Aᵀ.
    let out = run(&["index"], Some(r#"{"n": 1, "A": [[2.0]], "B": [[1.0]], "C": [[1.0]], "D": [[1.0]]}"#));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("InvalidBlocks"));
}

#[test]
fn cheb_degree_two() {
    let out = run(&["cheb", "--k", "2", "--points", "5"], None);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# v=1"));
    assert_eq!(lines.next().unwrap(), "k,x,T_k,U_k");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 5);
    for row in rows {
        let x = row[1];
        assert!((row[2] - (2.0 * x * x - 1.0)).abs() <= 1e-15);
        assert!((row[3] - (4.0 * x * x - 1.0)).abs() <= 1e-15);
    }
}

#[test]
fn verify_is_byte_identical_across_runs() {
    let args = ["verify", "--n", "2", "--trials", "100", "--seed", "7"];
    let first = run(&args, None);
    let second = run(&args, None);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stdout));
    assert_eq!(first.stdout, second.stdout);
    let doc: Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(doc["v"], 1);
    assert_eq!(doc["seed"], 7);
    assert_eq!(doc["trials"], 100);
    assert_eq!(doc["disagreements"].as_array().unwrap().len(), 0);
}

#[test]
fn output_flag_writes_a_file() {
    let dir = std::env::temp_dir().join(format!("hormander-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cheb.csv");
    let out = run(&["cheb", "--k-max", "3", "-o", path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 2 + 4 * 21);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn oscillator_orbit_indices() {
    let out = run(
        &["orbit", "--system", "oscillator:1:1.4142135623730951", "--seed-point", "[0.5, 0, 0, 0]", "--tol", "1e-11", "--half-period", "3"],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((doc["orbit"]["eta"].as_f64().unwrap() - 2.0 * std::f64::consts::PI).abs() <= 1e-9);
    let theta = 2.0 * std::f64::consts::PI * 2f64.sqrt();
    for entry in doc["indices"].as_array().unwrap() {
        let k = entry["k"].as_u64().unwrap() as f64;
        let expected = if (k * theta / 2.0).tan() > 0.0 { -1 } else { 1 };
        assert_eq!(doubled(entry), Some(expected), "{entry}");
    }
}

#[test]
fn orbit_rejects_a_point_off_the_fixed_set() {
    let out = run(&["orbit", "--system", "oscillator:1:2", "--seed-point", "[0.5, 0.1, 0, 0]"], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("NotOnFixedSet"));
}
