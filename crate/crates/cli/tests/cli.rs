use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sonclust"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const TWO: &str = "x0,weight\n-0.5,0.5\n0.5,0.5\n";

#[test]
fn lambda1_of_two_points() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "two.csv", TWO);
    for method in ["exact", "bisect"] {
        let o = run(&["lambda1", "--method", method, s(&f)]);
        assert_eq!(o.status.code(), Some(0));
        let v: f64 = stdout(&o).trim().parse().unwrap();
        assert!((v - 1.0).abs() < 1e-5, "{method}: {v}");
    }
    let o = run(&["lambda1", "--method", "bounds", "--format", "json", s(&f)]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["lower"], 0.5);
    assert_eq!(v["upper"], 1.0);
    let o = run(&["lambda-star", s(&f)]);
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 1.0).abs() < 1e-5);
}

#[test]
fn constants_json() {
    let o = run(&["constants", "--d", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["gamma_d"].as_f64().unwrap() - 1.104466).abs() < 1e-6);
    let o = run(&["constants", "--d", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn solve_at_zero_is_identity() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "pts.csv", "x0,x1,weight\n0.25,-1,1\n3,0.5,2\n-1e-3,7,0.5\n");
    let o = run(&["solve", "--lambda", "0", s(&f)]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let u: Vec<Vec<f64>> = serde_json::from_value(v["result"]["u"].clone()).unwrap();
    assert_eq!(u, vec![vec![0.25, -1.0], vec![3.0, 0.5], vec![-1e-3, 7.0]]);
    assert_eq!(v["result"]["converged"], true);
}

#[test]
fn sample_solve_verify_pipeline() {
    let dir = TempDir::new().unwrap();
    let m = dir.path().join("m.csv");
    let sol = dir.path().join("sol.json");
    assert_eq!(
        run(&["sample", "two-balls", "--d", "2", "--r", "1.5", "--n", "40", "--seed", "3", "-o", s(&m)]).status.code(),
        Some(0)
    );
    assert_eq!(run(&["solve", "--lambda", "0.8", s(&m), "-o", s(&sol)]).status.code(), Some(0));
    let o = run(&["verify", s(&m), s(&sol)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["valid"], true);

    // a corrupted solution is rejected with the numeric exit code
    let mut bad: Value = serde_json::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    let x = bad["result"]["u"][0][0].as_f64().unwrap();
    bad["result"]["u"][0][0] = Value::from(x + 0.1);
    bad.as_object_mut().unwrap().remove("partition");
    let badf = write(&dir, "bad.json", &bad.to_string());
    let o = run(&["verify", s(&m), s(&badf)]);
    assert_eq!(o.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["valid"], false);
}

#[test]
fn samplers_need_a_seed_and_are_reproducible() {
    assert_eq!(run(&["sample", "ball", "--d", "2", "--n", "10"]).status.code(), Some(1));
    let a = run(&["sample", "sphere", "--d", "3", "--n", "25", "--seed", "9"]);
    let b = run(&["sample", "sphere", "--d", "3", "--n", "25", "--seed", "9"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("x0,x1,x2,weight\n"));
    let c = run(&["sample", "cross-polytope", "--d", "2", "--format", "json"]);
    let v: Value = serde_json::from_slice(&c.stdout).unwrap();
    assert_eq!(v["weights"].as_array().unwrap().len(), 4);
}

#[test]
fn experiment_is_byte_identical() {
    let args = [
        "experiment", "stoch-ball", "--seed", "0..2", "--n", "40", "--factors", "1.2,0.8", "--format", "csv",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert_eq!(text.lines().count(), 1 + 2 * 2);
    assert!(text.starts_with("seed,"));
    let o = run(&["experiment", "separation", "--n", "40", "--lambda", "3.4"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["experiment", "detection", "--seed", "5..5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn detect_and_path() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.csv", "x0,weight\n0,1\n0.1,1\n5,1\n5.1,1\n");
    let p = write(&dir, "p.csv", "label\n0\n0\n1\n1\n");
    let o = run(&["detect", s(&m), s(&p)]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    // each pair fuses at 0.1/2, the two pair centroids split below 5/4
    assert!((v["lower"].as_f64().unwrap() - 0.05).abs() < 1e-5);
    assert!((v["upper"].as_f64().unwrap() - 1.25).abs() < 1e-5);
    assert_eq!(v["nonempty"], true);

    let o = run(&["path", s(&m), "--lambdas", "0.01,0.1,2", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let counts: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(counts, ["4", "2", "1"]);
    let o = run(&["path", s(&m), "--log-grid", "0.01", "2", "5"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["agglomeration"]["nested"], true);
}

#[test]
fn wasserstein_distances() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.csv", "x0,weight\n0,0.5\n1,0.5\n");
    let b = write(&dir, "b.csv", "x0,weight\n0.5,0.5\n3,0.5\n");
    let o = run(&["wasserstein", "--p", "1", s(&a), s(&b), "--plan"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 1.25).abs() < 1e-12);
    assert_eq!(v["plan"]["rows"], 2);
    let o = run(&["wasserstein", "--p", "inf", s(&a), s(&b), "--format", "text"]);
    assert_eq!(stdout(&o).trim(), "2.0");
    let c = write(&dir, "c.csv", "x0,weight\n0,2\n");
    assert_eq!(run(&["wasserstein", "--p", "1", s(&a), s(&c)]).status.code(), Some(1));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run(&["solve", "--lambda", "1", "/nonexistent/m.csv"]).status.code(), Some(3));
    let garbage = write(&dir, "g.csv", "x0,weight\n1,abc\n");
    assert_eq!(run(&["solve", "--lambda", "1", s(&garbage)]).status.code(), Some(3));
    let f = write(&dir, "two.csv", TWO);
    assert_eq!(run(&["solve", "--lambda", "-1", s(&f)]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["solve", s(&f)]).status.code(), Some(1));
    let o = run(&["solve", "--lambda", "0.3", "--max-iters", "1", s(&f)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("converge"));
    assert_eq!(
        run(&["constants", "--d", "2", "-o", "/nonexistent/dir/out.json"]).status.code(),
        Some(3)
    );
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn in_process_run() {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = sonclust_cli::run(["sonclust", "constants", "--d", "3", "--format", "text"], &mut out, &mut err);
    assert_eq!(code, 0);
    let text = String::from_utf8(out).unwrap();
    assert!(text.contains("gamma_d") && text.contains("1.166666666667"));
    assert!(err.is_empty());
}
