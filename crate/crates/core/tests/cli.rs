//! End-to-end checks of the installed binary: artifact schemas, byte-level
//! determinism, override flags, and the documented exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rkhsb"))
        .args(args)
        .output()
        .expect("binary spawns")
}

fn write_config(dir: &Path, name: &str, value: serde_json::Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(&value).unwrap()).unwrap();
    path.to_str().unwrap().to_owned()
}

fn sweep_config(out: &Path) -> serde_json::Value {
    serde_json::json!({
        "system": "toy1d",
        "m": 20,
        "kernel": {"type": "se", "sigma_s": 1.0, "lengthscale": 1.0},
        "sigma_n": {"absolute": 0.1},
        "deltas": [0.05],
        "seed": 1,
        "sweep_points": 51,
        "out_dir": out
    })
}

#[test]
fn sweep_writes_deterministic_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let cfg_a = write_config(dir.path(), "a.json", sweep_config(&out_a));
    let cfg_b = write_config(dir.path(), "b.json", sweep_config(&out_b));

    let status = run(&["sweep", "--config", &cfg_a]);
    assert!(status.status.success(), "stderr: {}", String::from_utf8_lossy(&status.stderr));
    assert!(run(&["sweep", "--config", &cfg_b]).status.success());

    let csv_a = std::fs::read_to_string(out_a.join("sweep.csv")).unwrap();
    let csv_b = std::fs::read_to_string(out_b.join("sweep.csv")).unwrap();
    assert_eq!(csv_a, csv_b, "same config and seed must emit identical bytes");

    let mut lines = csv_a.lines();
    assert_eq!(
        lines.next().unwrap(),
        "x1,mu,sigma,eps_det_ours,eps_prob_ours,eps_det_hashimoto,eps_prob_chowdhury,eps_prob_abbasi,eps_prob_seeger,eps_det_maddalena,f_true"
    );
    assert_eq!(lines.count(), 51);

    let svg = std::fs::read_to_string(out_a.join("sweep.svg")).unwrap();
    assert!(svg.starts_with("<svg"), "plot must be a standalone svg");
    assert!(svg.contains("ours det"), "legend must name the series");
}

#[test]
fn seed_override_changes_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), "cfg.json", sweep_config(&out));
    assert!(run(&["sweep", "--config", &cfg]).status.success());
    let base = std::fs::read_to_string(out.join("sweep.csv")).unwrap();

    let out2 = dir.path().join("out2");
    let status = run(&["sweep", "--config", &cfg, "--seed", "9", "--out", out2.to_str().unwrap()]);
    assert!(status.status.success());
    let reseeded = std::fs::read_to_string(out2.join("sweep.csv")).unwrap();
    assert_ne!(base, reseeded, "a different seed must regenerate the dataset");
}

#[test]
fn zero_noise_collapses_prob_onto_det() {
    let dir = tempfile::tempdir().unwrap();
    // Noise-free dataset: the probabilistic and deterministic bounds must
    // coincide exactly, so their CSV columns match byte for byte.
    let data_path = dir.path().join("line.csv");
    let mut csv = String::from("x1,y\n");
    for i in 0..12 {
        let x = i as f64 / 11.0;
        csv.push_str(&format!("{x},{}\n", 0.7 * x));
    }
    std::fs::write(&data_path, csv).unwrap();

    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "cfg.json",
        serde_json::json!({
            "dataset": data_path,
            "sigma_v": 0.0,
            "norm_bounds": [5.0],
            "kernel": {"type": "se", "sigma_s": 1.0, "lengthscale": 1.0},
            "sigma_n": {"absolute": 0.1},
            "sweep_points": 21,
            "out_dir": out
        }),
    );
    let status = run(&["sweep", "--config", &cfg]);
    assert!(status.status.success(), "stderr: {}", String::from_utf8_lossy(&status.stderr));

    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let det = header.iter().position(|h| *h == "eps_det_ours").unwrap();
    let prob = header.iter().position(|h| *h == "eps_prob_ours").unwrap();
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[det], fields[prob], "sigma_v = 0 must make the bounds coincide");
    }
}

#[test]
fn bench_writes_single_row_and_trend() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "bench.json",
        serde_json::json!({
            "system": "toy1d",
            "m": 20,
            "kernel": {"type": "se", "sigma_s": 1.0, "lengthscale": 1.0},
            "sigma_n": {"absolute": 0.1},
            "queries": 200,
            "seed": 2,
            "out_dir": out
        }),
    );
    assert!(run(&["bench", "--config", &cfg]).status.success());
    let bench = std::fs::read_to_string(out.join("bench.csv")).unwrap();
    let mut lines = bench.lines();
    assert!(lines.next().unwrap().starts_with("system,kernel,sigma_n,m,"));
    assert_eq!(lines.count(), 1);

    let cfg = write_config(
        dir.path(),
        "trend.json",
        serde_json::json!({
            "system": "toy1d",
            "m": 20,
            "kernel": {"type": "se", "sigma_s": 1.0, "lengthscale": 1.0},
            "sigma_n": {"absolute": 0.1},
            "queries": 200,
            "seed": 2,
            "bench_m_values": [10, 20],
            "out_dir": out
        }),
    );
    assert!(run(&["bench", "--config", &cfg]).status.success());
    let trend = std::fs::read_to_string(out.join("trend.csv")).unwrap();
    assert_eq!(trend.lines().count(), 3, "header plus one row per m");
    assert!(out.join("trend.svg").exists());
}

#[test]
fn barrier_writes_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "barrier.json",
        serde_json::json!({
            "system": "lin2d",
            "m": 30,
            "kernel": {"type": "se", "sigma_s": 1.0, "lengthscale": 1.0},
            "sigma_n": {"ratio": 1.0},
            "deltas": [0.05],
            "seed": 1,
            "barrier": {
                "partition_per_dim": 5,
                "grid_per_dim": 2,
                "slack": 0.05,
                "horizon": 1,
                "mc_trajectories": 2000
            },
            "out_dir": out
        }),
    );
    let status = run(&["barrier", "--config", &cfg]);
    assert!(status.status.success(), "stderr: {}", String::from_utf8_lossy(&status.stderr));

    for kind in ["prob", "det", "hashimoto"] {
        let text = std::fs::read_to_string(out.join(format!("certificate_{kind}.json"))).unwrap();
        let cert: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(cert["regions"], 25);
        assert_eq!(cert["values"].as_array().unwrap().len(), 25);
        assert_eq!(cert["bound_kind"], kind);
        assert_eq!(cert["N"], 1);
        for field in ["eta", "beta", "P_s", "timing_seconds"] {
            assert!(cert[field].is_number(), "{kind} certificate missing {field}");
        }
        if kind == "prob" {
            assert_eq!(cert["delta"], 0.05);
        } else {
            assert!(cert["delta"].is_null());
        }
    }
}

#[test]
fn horizon_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "barrier.json",
        serde_json::json!({
            "system": "lin2d",
            "m": 30,
            "kernel": {"type": "se", "sigma_s": 1.0, "lengthscale": 1.0},
            "sigma_n": {"ratio": 1.0},
            "seed": 1,
            "barrier": {
                "partition_per_dim": 5,
                "horizon": 1,
                "mc_trajectories": 500,
                "bound_kinds": ["det"]
            },
            "out_dir": out
        }),
    );
    let status = run(&["barrier", "--config", &cfg, "--horizon", "10"]);
    assert!(status.status.success(), "stderr: {}", String::from_utf8_lossy(&status.stderr));
    let cert: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out.join("certificate_det.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(cert["N"], 10);
}

#[test]
fn coverage_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "coverage.json",
        serde_json::json!({
            "system": "toy1d",
            "m": 10,
            "kernel": {"type": "se", "sigma_s": 1.0, "lengthscale": 1.0},
            "sigma_n": {"absolute": 0.1},
            "deltas": [0.05, 0.5],
            "seed": 3,
            "coverage_queries": 5,
            "trials": 200,
            "out_dir": out
        }),
    );
    let status = run(&["coverage", "--config", &cfg]);
    assert!(status.status.success(), "stderr: {}", String::from_utf8_lossy(&status.stderr));
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out.join("coverage_output0.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["trials"], 200);
    assert_eq!(report["queries"], 5);
    assert_eq!(report["det_violations"], 0);
    assert_eq!(report["per_delta"].as_array().unwrap().len(), 2);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        serde_json::json!({"system": "unknown9000", "out_dir": dir.path().join("out")}),
    );
    let out = run(&["sweep", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown system"));

    let missing = run(&["sweep", "--config", dir.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn numerical_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = sweep_config(&dir.path().join("out"));
    // A norm budget far below the data's own complexity is rejected by the
    // c* feasibility check, which is a numerical failure, not a config one.
    cfg["norm_bounds"] = serde_json::json!([0.01]);
    let path = write_config(dir.path(), "tiny.json", cfg);
    let out = run(&["sweep", "--config", &path]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("norm bound too small"));
}
