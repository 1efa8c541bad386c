use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/corpus").join(format!("{name}.json"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spectragraph")).args(args).output().expect("binary runs")
}

fn run_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spectragraph"))
        .args(args)
        .env("SPECTRAGRAPH_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn column(out: &Output, col: usize) -> Vec<f64> {
    String::from_utf8_lossy(&out.stdout).lines().skip(1).map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect()
}

#[test]
fn neumann_interval_spectrum() {
    let out = run(&["spectrum", corpus("neumann-interval").to_str().unwrap(), "--k", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let ev = column(&out, 1);
    let pi2 = std::f64::consts::PI.powi(2);
    assert!(ev[0].abs() < 1e-12);
    assert!((ev[1] - pi2).abs() < 1e-9 * pi2 && (ev[2] - 4.0 * pi2).abs() < 1e-9 * pi2);
}

#[test]
fn robin_interval_first_row() {
    let out = run(&["spectrum", corpus("robin1-neumann").to_str().unwrap(), "--k", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!((column(&out, 1)[0] - 0.74017).abs() < 5e-5);
}

#[test]
fn both_backends_report_disagreement() {
    let out = run(&["spectrum", corpus("robin1-neumann").to_str().unwrap(), "--backend", "both", "--k", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("max relative disagreement"));
}

#[test]
fn input_errors_exit_one() {
    assert_eq!(run(&["spectrum", "/nonexistent/graph.json"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"vertices\": [\n    {\"id\": \"a\", \"colour\": 1}\n  ]\n}").unwrap();
    let out = run(&["spectrum", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("line 3") && msg.contains("column"), "{msg}");
    let out = run(&["verify", "unknown-thm"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("join-deltaprime-negative"));
    assert_eq!(run_env(&["verify", "scale", "--trials", "1"], "zero").status.code(), Some(1));
}

#[test]
fn solver_failure_exits_two() {
    // the derivative formula needs a simple eigenvalue; λ₁ = λ₂ = 0 here
    let out = run(&["derivative", corpus("three-star-deltaprime").to_str().unwrap(), "--vertex", "c", "--param", "beta"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn verify_examples_exit_zero() {
    let out = run(&["verify", "scale", "--trials", "50"]);
    assert_eq!(out.status.code(), Some(0));
    let slack = column(&out, 6);
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().next().unwrap(), "theorem,seed,trial,k,lambda_before,lambda_after,slack,verdict");
    assert!(slack.iter().all(|s| s.abs() < 1e-9));
    assert_eq!(run(&["verify", "join-deltaprime-negative", "--trials", "100"]).status.code(), Some(0));
}

#[test]
fn verify_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &PathBuf| {
        vec!["verify".to_string(), "join-delta".into(), "--seed".into(), "7".into(), "--trials".into(), "20".into(), "--out".into(), p.to_str().unwrap().into()]
    };
    let aa: Vec<String> = args(&a);
    let bb: Vec<String> = args(&b);
    assert_eq!(run_env(&aa.iter().map(String::as_str).collect::<Vec<_>>(), "4").status.code(), Some(0));
    assert_eq!(run_env(&bb.iter().map(String::as_str).collect::<Vec<_>>(), "1").status.code(), Some(0));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    // nothing but the two outputs is left behind
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
}

#[test]
fn shrink_and_hypothesis_violation() {
    let out = run(&["shrink", corpus("lasso").to_str().unwrap(), "--edges", "e2"]);
    assert_eq!(out.status.code(), Some(0));
    let d = column(&out, 2);
    assert!(d.windows(2).all(|w| w[1] < w[0]) && *d.last().unwrap() < 1e-2);
    let out = run(&["shrink", corpus("pumpkin-deltaprime").to_str().unwrap(), "--edges", "e1,e2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hypothesis violated"));
}

#[test]
fn bounds_csv_columns() {
    let out = run(&["bounds", corpus("robin1-neumann").to_str().unwrap(), corpus("star-three-delta").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "graph_id,lower,lambda1,upper_constant,upper_flower");
    assert!(lines.next().unwrap().starts_with("robin1-neumann,"));
    assert!(lines.next().unwrap().starts_with("star-three-delta,"));
}

#[test]
fn surgery_writes_graph() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("pumpkin.json");
    let out = run(&[
        "surgery",
        corpus("robin1-neumann").to_str().unwrap(),
        "--op",
        "attach-edge:e2:v1:v2:0.1",
        "--k",
        "1",
        "--graph-out",
        g.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!((column(&out, 2)[0] - 0.83156).abs() < 5e-5);
    let again = run(&["spectrum", g.to_str().unwrap(), "--k", "1"]);
    assert!((column(&again, 1)[0] - 0.83156).abs() < 5e-5);
    assert_eq!(run(&["surgery", g.to_str().unwrap(), "--op", "twist:v1"]).status.code(), Some(1));
}

#[test]
fn derivative_matches_interval_case() {
    // Neumann interval with δ(0) at one end: dλ₁/dα = 1/L
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("interval.json");
    std::fs::write(
        &g,
        r#"{"vertices": [{"id": "a", "condition": {"type": "delta", "strength": 0.0}},
                        {"id": "b", "condition": {"type": "neumann"}}],
            "edges": [{"id": "e", "from": "a", "to": "b", "length": 2.0}]}"#,
    )
    .unwrap();
    let out = run(&["derivative", g.to_str().unwrap(), "--vertex", "a", "--param", "alpha"]);
    assert_eq!(out.status.code(), Some(0));
    assert!((column(&out, 3)[0] - 0.5).abs() < 1e-9);
}

#[test]
fn reference_examples_all_pass() {
    let out = run(&["paper-examples"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("0.74017") && text.contains("0.83156"));
    assert!(text.contains("PASS alpha-c-localization") && text.contains("PASS pumpkin-hypothesis-violated"));
    assert!(!text.contains("FAIL"));
}
