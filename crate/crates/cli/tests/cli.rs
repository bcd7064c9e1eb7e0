use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_invmetric"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn frame_of_a_ball_point() {
    let dir = tempfile::tempdir().unwrap();
    let ball = config(dir.path(), "ball.toml", "family = \"ball\"\ndimension = 2\n");
    let out = run(&["frame", ball.to_str().unwrap(), "--point", "0:0.5,0:0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["delta"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(v["projection"], "0:1,0:0");
}

#[test]
fn dist_brackets_the_exact_ball_distance() {
    let dir = tempfile::tempdir().unwrap();
    let ball = config(dir.path(), "ball.toml", "family = \"ball\"\n");
    let out = run(&["dist", ball.to_str().unwrap(), "--z", "0.5:0,0:0", "--w", "0:0,0:0.5", "--segments", "16"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let (lo, ex, up) = (v["lower"].as_f64().unwrap(), v["exact"].as_f64().unwrap(), v["upper"].as_f64().unwrap());
    assert!(lo <= ex && ex <= up * (1.0 + 1e-12));
    assert!((up - ex) / ex < 5e-3);
}

#[test]
fn estimate_and_royden_in_csv() {
    let dir = tempfile::tempdir().unwrap();
    let e = config(dir.path(), "e.toml", "family = \"ellipsoid\"\ncoefficients = [1.0, 4.0]\n");
    let out = run(&["estimate", e.to_str().unwrap(), "--quantity", "A", "--z", "0.3,0.1", "--w", "0.2,0:0.2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# invmetric-csv/1"));
    assert_eq!(lines.next(), Some("A"));
    assert!(lines.next().unwrap().parse::<f64>().unwrap() > 0.0);
    let out = run(&["royden", e.to_str().unwrap(), "--point", "0.3,0.1", "--vector", "1,0"]);
    let v = json(&out);
    assert!(v["lower"].as_f64().unwrap() <= v["upper"].as_f64().unwrap());
}

#[test]
fn verify_writes_reproducible_evidence() {
    let dir = tempfile::tempdir().unwrap();
    let ball = config(dir.path(), "ball.toml", "family = \"ball\"\n");
    let mut csvs = Vec::new();
    for k in 0..2 {
        let out_dir = dir.path().join(format!("run{k}"));
        let out = run(&[
            "verify",
            ball.to_str().unwrap(),
            "--suite",
            "symmetry",
            "--samples",
            "30",
            "--seed",
            "7",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(out_dir.join("symmetry.json").exists());
        csvs.push(std::fs::read(out_dir.join("symmetry.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    assert!(String::from_utf8_lossy(&csvs[0]).starts_with("# invmetric-csv/1 suite=Symmetry"));
}

#[test]
fn calibrate_reports_constants() {
    let dir = tempfile::tempdir().unwrap();
    let ball = config(dir.path(), "ball.toml", "family = \"ball\"\n");
    let out = run(&["calibrate", ball.to_str().unwrap(), "--regimes", "transversal,mixed", "--samples", "50"]);
    let v = json(&out);
    // too few pairs for the held-out coverage target: the run completes but fails
    let pass = v["holdout_fraction"].as_f64().unwrap() >= 0.999 && v["stable"].as_bool().unwrap();
    assert_eq!(out.status.code(), Some(if pass { 0 } else { 1 }));
    assert!(v["c_emp"].as_f64().unwrap() > 0.0);
    assert!(v["c_emp"].as_f64().unwrap() <= v["big_c_emp"].as_f64().unwrap());
}

#[test]
fn example_s9_passes_and_fails_by_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["example-s9", "--levels", "4", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("s9example.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2 + 8);
    // δ = ε³ decreases, but by less than 2× per level
    let out = run(&["example-s9", "--exponent", "3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exit_codes_for_configuration_and_numeric_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = config(dir.path(), "bad.toml", "family = \"torus\"\n");
    assert_eq!(run(&["frame", bad.to_str().unwrap(), "--point", "0,0"]).status.code(), Some(2));
    let e = config(dir.path(), "e.toml", "family = \"ellipsoid\"\ncoefficients = [1.0, 4.0]\n");
    assert_eq!(run(&["verify", e.to_str().unwrap(), "--suite", "Prop4"]).status.code(), Some(2));
    assert_eq!(run(&["verify", e.to_str().unwrap(), "--suite", "Prop7"]).status.code(), Some(2));
    let ball = config(dir.path(), "ball.toml", "family = \"ball\"\n");
    assert_eq!(run(&["frame", ball.to_str().unwrap(), "--point", "0.1"]).status.code(), Some(2));
    // a complex line has no complex-tangential directions: the sampler gives up
    let line = config(dir.path(), "line.toml", "family = \"ball\"\ndimension = 1\n");
    let out = run(&["calibrate", line.to_str().unwrap(), "--regimes", "tangential", "--samples", "2"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}
