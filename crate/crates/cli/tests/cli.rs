use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn iimhhl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iimhhl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn rows(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|x| x.unwrap()).collect()
}

fn header(path: &Path) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.headers().unwrap().iter().map(String::from).collect()
}

#[test]
fn solve_writes_trace_and_solution() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = iimhhl(&["solve", "--kappa", "10", "--shots", "200", "--shift", "abs-ratio", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let trace = out.join("trace.csv");
    assert_eq!(
        header(&trace),
        [
            "iteration",
            "rel_error",
            "residual_norm",
            "accepted_shots",
            "total_executions",
            "cumulative_measurements",
            "f1",
            "f2"
        ]
    );
    let recs = rows(&trace);
    assert_eq!(recs.len(), 20);
    let mut prev = 0u64;
    for (i, r) in recs.iter().enumerate() {
        assert_eq!(r[0].parse::<usize>().unwrap(), i);
        assert_eq!(r[3].parse::<u64>().unwrap(), 200);
        let cum: u64 = r[5].parse().unwrap();
        assert!(cum > prev);
        prev = cum;
    }
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("solution.json")).unwrap()).unwrap();
    assert_eq!(doc["x"].as_array().unwrap().len(), 4);
    assert_eq!(doc["iterations"], 20);
}

#[test]
fn identity_statevector_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("id");
    let o = iimhhl(&["solve", "--identity", "--statevector", "--no-refine", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let recs = rows(&out.join("trace.csv"));
    assert_eq!(recs.len(), 1);
    assert!(recs[0][1].parse::<f64>().unwrap() <= 1e-10);
}

#[test]
fn statevector_refinement_reaches_machine_precision() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sv");
    let o = iimhhl(&["solve", "--kappa", "10", "--statevector", "--iters", "10", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let last = rows(&out.join("trace.csv")).pop().unwrap();
    assert!(last[1].parse::<f64>().unwrap() <= 1e-12);
}

#[test]
fn solve_is_reproducible_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        assert!(iimhhl(&["solve", "--kappa", "10", "--seed", "3", "--iters", "4", "--out", out.to_str().unwrap()]).status.success());
        fs::read(out.join("trace.csv")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn gen_problem_round_trips_through_solve() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("p.json");
    assert!(iimhhl(&["gen-problem", "--kappa", "10", "--solution", "2", "--out", problem.to_str().unwrap()]).status.success());
    let out = dir.path().join("o");
    let o = iimhhl(&["solve", "--problem", problem.to_str().unwrap(), "--statevector", "--iters", "8", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let last = rows(&out.join("trace.csv")).pop().unwrap();
    assert!(last[1].parse::<f64>().unwrap() <= 1e-10);
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let o = out.to_str().unwrap();
    for args in [
        vec!["solve", "--bogus"],
        vec!["solve", "--kappa", "0.5", "--out", o],
        vec!["solve", "--shift", "sideways", "--out", o],
        vec!["solve", "--pre-shift", "1,2", "--out", o],
        vec!["solve", "--identity", "--problem", "p.json", "--out", o],
        vec!["figure", "f9"],
    ] {
        let r = iimhhl(&args);
        assert_eq!(r.status.code(), Some(2), "{args:?}");
        assert!(!r.stderr.is_empty());
    }
    assert!(!out.exists());
}

#[test]
fn missing_problem_file_is_a_runtime_error() {
    let r = iimhhl(&["solve", "--problem", "/nonexistent/p.json"]);
    assert_eq!(r.status.code(), Some(1));
}

fn write_spec(dir: &Path, text: &str) -> String {
    let p = dir.join("spec.json");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn sweep_covers_the_product() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        r#"{"name": "grid", "kappa": [10], "solution": [1, 2], "p": [4, 5], "shots": [100],
            "strategy": ["none", "abs-ratio", "abs-sqrt-ratio"], "iterations": 3}"#,
    );
    let csv_path = dir.path().join("out.csv");
    let o = iimhhl(&["sweep", &spec, "--out", csv_path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let recs = rows(&csv_path);
    assert_eq!(recs.len(), 2 * 2 * 3 * 3);
    let mut groups = std::collections::BTreeSet::new();
    for r in &recs {
        assert_eq!(&r[0], "grid");
        groups.insert((r[2].to_string(), r[3].to_string(), r[5].to_string()));
    }
    assert_eq!(groups.len(), 12);
}

#[test]
fn empty_sweep_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        r#"{"name": "none", "kappa": [10], "solution": [], "p": [4], "shots": [100], "strategy": ["none"]}"#,
    );
    let csv_path = dir.path().join("out.csv");
    assert!(iimhhl(&["sweep", &spec, "--out", csv_path.to_str().unwrap()]).status.success());
    assert_eq!(header(&csv_path).len(), 11);
    assert!(rows(&csv_path).is_empty());
}

#[test]
fn malformed_sweep_specs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("out.csv");
    for text in [
        "{\"name\": \"x\", \"kappa\": [10,,]}",
        r#"{"name": "x", "kappa": [10], "solution": [1], "p": [4], "shots": [1], "strategy": ["none"], "extra": 0}"#,
        r#"{"name": "x", "kappa": [0.1], "solution": [1], "p": [4], "shots": [1], "strategy": ["none"]}"#,
        r#"{"name": "x", "solution": [1], "p": [4], "shots": [1], "strategy": ["none"]}"#,
    ] {
        let spec = write_spec(dir.path(), text);
        let r = iimhhl(&["sweep", &spec, "--out", csv_path.to_str().unwrap()]);
        assert_eq!(r.status.code(), Some(2), "{text}");
        assert!(String::from_utf8_lossy(&r.stderr).contains("spec.json:"));
    }
    assert!(!csv_path.exists());
}

#[test]
fn figures_are_deterministic_and_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = iimhhl(&["figure", "f2", "--repeats", "2", "--iters", "5", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let a = run("a");
    let b = run("b");
    assert_eq!(fs::read(a.join("f2.csv")).unwrap(), fs::read(b.join("f2.csv")).unwrap());
    assert_eq!(fs::read(a.join("f2.svg")).unwrap(), fs::read(b.join("f2.svg")).unwrap());

    let recs = rows(&a.join("f2.csv"));
    // six curves, two seeds plus a median, five iterations
    assert_eq!(recs.len(), 6 * 3 * 5);
    let svg = fs::read_to_string(a.join("f2.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(svg.trim_end().ends_with("</svg>"));
    for name in ["none", "uniform-ratio", "abs-tenth", "abs-ratio", "abs-sqrt-ratio", "statevector"] {
        assert!(svg.contains(&format!("data-series=\"{name}\"")), "{name}");
    }
}

#[test]
fn shot_sweep_figure_error_falls_with_shots() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f");
    assert!(iimhhl(&["figure", "f1", "--repeats", "3", "--out", out.to_str().unwrap()]).status.success());
    let medians: Vec<(u64, f64)> = rows(&out.join("f1.csv"))
        .iter()
        .filter(|r| &r[1] == "sampled" && &r[2] == "median")
        .map(|r| (r[5].parse().unwrap(), r[4].parse().unwrap()))
        .collect();
    assert_eq!(medians.len(), 5);
    assert!(medians.first().unwrap().1 > 10.0 * medians.last().unwrap().1);
}
