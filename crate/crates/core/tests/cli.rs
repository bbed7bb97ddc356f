use std::path::Path;
use std::process::{Command, Output};

fn rmfnn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rmfnn")).args(args).output().unwrap()
}

fn column(path: &Path, name: &str) -> Vec<String> {
    let mut rd = csv::Reader::from_path(path).unwrap();
    let idx = rd.headers().unwrap().iter().position(|h| h == name).unwrap();
    rd.records().map(|r| r.unwrap()[idx].to_string()).collect()
}

#[test]
fn train_then_predict_reproduces_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = dir.path().join("bundle");
    let b = bundle.to_str().unwrap();
    let out = rmfnn(&["train", "--problem", "ivp", "--eps", "0.01", "--epochs", "20", "--seed", "3", "--out", b]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["manifest.json", "dnn.json", "resnn.json", "dataset.csv", "predictions.csv", "summary.json"] {
        assert!(bundle.join(f).exists(), "{f}");
    }
    assert_eq!(column(&bundle.join("dataset.csv"), "provenance").iter().filter(|p| *p == "real").count(), 25);

    let again = dir.path().join("again.csv");
    let out = rmfnn(&[
        "predict",
        "--bundle",
        b,
        "--points",
        bundle.join("dataset.csv").to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        column(&bundle.join("predictions.csv"), "prediction"),
        column(&again, "prediction")
    );

    let first = column(&again, "prediction")[0].clone();
    let theta = column(&again, "theta_0")[0].clone();
    let out = rmfnn(&["predict", "--bundle", b, "--theta", &theta]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), first);
}

#[test]
fn training_is_deterministic_across_processes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let out = rmfnn(&[
            "train", "--problem", "pulsed", "--method", "mfnn", "--n-hf", "80", "--epochs", "10", "--seed", "5",
            "--out", p.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(p.join("predictions.csv")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn mc_on_the_exact_model() {
    let out = rmfnn(&["mc", "--problem", "ivp", "--model", "exact", "--n-theta", "20000", "--seed", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let value = v["value"].as_f64().unwrap();
    let stderr = v["stderr"].as_f64().unwrap();
    assert!(value > 0.0 && stderr > 0.0 && stderr < 0.1 * value);
    assert_eq!(v["n_theta"].as_u64(), Some(20000));
}

#[test]
fn mc_on_a_discretized_model_needs_steps() {
    let out = rmfnn(&["mc", "--problem", "ivp", "--model", "hf", "--n-theta", "100"]);
    assert_eq!(out.status.code(), Some(2));
    let out = rmfnn(&["mc", "--problem", "ivp", "--model", "hf", "--n-theta", "100", "--h-hf", "0.5", "--h-lf", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn plan_prints_the_published_row() {
    let out = rmfnn(&["plan", "--problem", "wave", "--eps", "0.01"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["n_theta"].as_u64(), Some(15000));
    assert_eq!(v["n_i"].as_u64(), Some(451));
    assert_eq!(v["n"].as_u64(), Some(4961));
    assert_eq!(v["interpolated"].as_bool(), Some(false));

    let out = rmfnn(&["plan", "--problem", "ivp", "--eps", "0.05"]);
    assert_eq!(out.status.code(), Some(2));
    let out = rmfnn(&["plan", "--problem", "ivp", "--eps", "0.05", "--interpolate"]);
    assert!(out.status.success());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"n_hf": [100], "epoch": 1}"#).unwrap();
    let out = rmfnn(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("epoch"));

    let out = rmfnn(&["predict", "--bundle", dir.path().join("none").to_str().unwrap(), "--theta", "0.1"]);
    assert_eq!(out.status.code(), Some(4));

    assert_eq!(rmfnn(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(rmfnn(&["--help"]).status.code(), Some(0));
}

#[test]
fn pedagogy_writes_three_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = rmfnn(&["pedagogy", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["models.csv", "scatter.csv", "residual.csv"] {
        assert_eq!(column(&dir.path().join(f), if f == "scatter.csv" { "q_lf" } else { "theta" }).len(), 400);
    }
}

#[test]
fn small_sweep_and_tolerance_study() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = dir.path().join("sweep");
    let out = rmfnn(&[
        "sweep", "--n-hf", "60", "--seeds", "0,1", "--epochs", "5", "--n-test", "500", "--out",
        sweep.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(column(&sweep.join("trials.csv"), "mse").len(), 6);

    let cfg = dir.path().join("tol.json");
    std::fs::write(
        &cfg,
        r#"{"tolerances": [0.1], "trials": 2, "reference_points": 20000, "mse_points": 2000, "cost_samples": 5, "timing_repeats": 1}"#,
    )
    .unwrap();
    let tol = dir.path().join("tol");
    let out = rmfnn(&["tolerance-study", "--config", cfg.to_str().unwrap(), "--out", tol.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(column(&tol.join("convergence.csv"), "eps_tol").len(), 1);
    assert_eq!(column(&tol.join("scatter.csv"), "trial").len(), 2);
}
