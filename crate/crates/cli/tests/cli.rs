use std::path::Path;
use std::process::{Command, Output};

use intertwine::io::{read_graph, read_vector};
use intertwine::PyramidCoefficients;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_intertwine"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen_path(dir: &Path, n: usize) -> (std::path::PathBuf, std::path::PathBuf) {
    let graph = dir.join("g.txt");
    let signal = dir.join("f.txt");
    let n = n.to_string();
    ok(&["gen", "--kind", "path", "--n", &n, "--signal-kind", "piecewise", "--signal", s(&signal), "--out", s(&graph)]);
    (graph, signal)
}

#[test]
fn gen_writes_readable_files() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("grid.txt");
    let signal = dir.path().join("sign.txt");
    ok(&[
        "gen", "--kind", "grid", "--n", "6", "--cols", "5", "--signal-kind", "fourier-sign", "--signal", s(&signal),
        "--out", s(&graph),
    ]);
    let g = read_graph(&graph, None).unwrap();
    assert_eq!(g.n(), 30);
    assert_eq!(g.edge_count(), 6 * 4 + 5 * 5);
    let f = read_vector(&signal, Some(30)).unwrap();
    assert!(f.iter().all(|v| v.abs() == 1.0));
}

#[test]
fn analyze_reconstructs_and_conserves() {
    let dir = tempfile::tempdir().unwrap();
    let (graph, signal) = gen_path(dir.path(), 300);
    let out = dir.path().join("run");
    let stdout = ok(&["analyze", "--graph", s(&graph), "--signal", s(&signal), "--seed", "3", "--out", s(&out)]);
    assert!(stdout.contains("coefficients=300"), "{stdout}");
    let coeffs = PyramidCoefficients::from_json(&std::fs::read_to_string(out.join("coefficients.json")).unwrap()).unwrap();
    assert_eq!(coeffs.coefficient_count(), 300);
    let f = read_vector(&signal, Some(300)).unwrap();
    let rec = read_vector(&out.join("reconstruction.txt"), Some(300)).unwrap();
    for (a, b) in rec.iter().zip(&f) {
        assert!((a - b).abs() <= 1e-8 * 2.0);
    }
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (graph, signal) = gen_path(dir.path(), 200);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        ok(&["compress", "--graph", s(&graph), "--signal", s(&signal), "--seed", "9", "--keep", "0.2", "--out", s(out)]);
    }
    for name in ["coefficients.json", "compressed.txt", "curve.csv", "compression.json"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn compress_keep_all_is_lossless() {
    let dir = tempfile::tempdir().unwrap();
    let (graph, signal) = gen_path(dir.path(), 256);
    let out = dir.path().join("c");
    ok(&["compress", "--graph", s(&graph), "--signal", s(&signal), "--keep", "1", "--out", s(&out)]);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("compression.json")).unwrap()).unwrap();
    assert!(report["relative_l2_error"].as_f64().unwrap() <= 1e-8);
    let curve = std::fs::read_to_string(out.join("curve.csv")).unwrap();
    let errors: Vec<f64> = curve
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(errors.len(), 21);
    assert!(errors.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn tune_prints_grid() {
    let dir = tempfile::tempdir().unwrap();
    let (graph, _) = gen_path(dir.path(), 50);
    let stdout = ok(&["tune", "--graph", s(&graph), "--grid", "5", "--samples", "20"]);
    let rows: Vec<&str> = stdout.lines().collect();
    assert!(rows[0].starts_with("q,"));
    assert_eq!(rows.len(), 1 + 5 + 1);
    assert!(rows[6].contains("selected_q="));
}

#[test]
fn validate_exact_checks_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.jsonl");
    ok(&["validate", "--max-n", "4", "--samples", "0", "--out", s(&out)]);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().count() > 100);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["pass"], true, "{line}");
    }
}

#[test]
fn errors_are_json_records() {
    let dir = tempfile::tempdir().unwrap();
    let (graph, _) = gen_path(dir.path(), 10);
    let signal = dir.path().join("short.txt");
    std::fs::write(&signal, "1\n2\n3\n").unwrap();
    let out = run(&["analyze", "--graph", s(&graph), "--signal", s(&signal), "--out", s(&dir.path().join("x"))]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    let v: serde_json::Value = serde_json::from_str(stderr.lines().last().unwrap()).unwrap();
    assert!(v["error"].is_string());
    assert!(v["message"].is_string());

    let out = run(&["validate", "--max-n", "6", "--samples", "0", "--out", s(&dir.path().join("v"))]);
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(String::from_utf8(out.stderr).unwrap().trim()).unwrap();
    assert_eq!(v["error"], "GraphTooLarge");
}
