use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_planar-emd"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn emd_prints_cost_and_writes_plan() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("a.txt"), "n 8 grid\n0 0 1\n").unwrap();
    fs::write(p.join("b.txt"), "n 8 grid\n3 4 1\n").unwrap();
    let o = run(p, &["emd", "a.txt", "b.txt", "--plan", "plan.txt"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "5");
    let plan = fs::read_to_string(p.join("plan.txt")).unwrap();
    assert_eq!(plan, "0 0 3 4 1\ncost 5\n");
}

#[test]
fn metric_override_switches_to_the_torus() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("a.txt"), "n 8 grid\n0 0 1\n").unwrap();
    fs::write(p.join("b.txt"), "n 8 grid\n7 0 1\n").unwrap();
    let o = run(p, &["emd", "a.txt", "b.txt", "--metric", "torus"]);
    assert_eq!(stdout(&o).trim(), "1");
}

#[test]
fn dense_files_are_read() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("a.txt"), "n 2 grid\n0.5 0.5\n0 0\n").unwrap();
    fs::write(p.join("b.txt"), "n 2 grid\n0 0\n0.5 0.5\n").unwrap();
    let o = run(p, &["emd", "a.txt", "b.txt"]);
    assert_eq!(stdout(&o).trim(), "1");
}

#[test]
fn embed_writes_both_parts() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("a.txt"), "n 4 torus\n1 2 1\n").unwrap();
    assert!(run(p, &["embed", "a.txt", "--out", "v.txt"]).status.success());
    let text = fs::read_to_string(p.join("v.txt")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n 4 embedded");
    assert_eq!(lines.len(), 1 + 2 * 16);
    assert!(lines[1..].iter().all(|l| l.parse::<f64>().is_ok()));
}

#[test]
fn reports_are_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = run(p, &["distortion", "--n", "6", "--pairs", "10", "--seed", "1", "--calibration-samples", "10"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in ["n", "variant", "kappa", "max_expansion", "max_contraction", "distortion", "pair_count", "wall_ms"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["wall_ms"], 0);

    let o = run(p, &["sweep", "--ns", "4,6", "--pairs", "5", "--calibration-samples", "5", "--out", "s.csv"]);
    assert!(o.status.success());
    let csv = fs::read_to_string(p.join("s.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("n,variant,pairs,seed,kappa,max_expansion,max_contraction,distortion,wall_ms\n"));

    let o = run(p, &["nn", "--n", "6", "--dataset", "5", "--queries", "2"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["recall_at_1"].is_number());

    let o = run(p, &["calibrate", "--n", "6", "--samples", "10", "--seed", "3"]);
    let kappa: f64 = stdout(&o).trim().parse().unwrap();
    assert!(kappa > 0.0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(run(p, &["distortion", "--n", "1", "--pairs", "3"]).status.code(), Some(2));
    assert_eq!(run(p, &["distortion", "--n", "8", "--pairs", "3", "--mix", "dirac=0.3"]).status.code(), Some(2));
    assert_eq!(run(p, &["emd", "missing.txt", "missing.txt"]).status.code(), Some(2));
    assert_eq!(run(p, &["frobnicate"]).status.code(), Some(2));
    fs::write(p.join("bad.txt"), "n 4 grid\n0 0 0.5\n").unwrap();
    assert_eq!(run(p, &["emd", "bad.txt", "bad.txt"]).status.code(), Some(2));
}
