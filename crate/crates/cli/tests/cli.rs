use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_wgqed");

const BASELINE: &str = r#"{
    "model": {"L": 100, "lambda_ir": 0, "lambda_uv": 62.83185307179586,
              "omega_0": 31.41592653589793, "gamma": 3.141592653589793},
    "packet": {"k_p": 31.41592653589793, "delta_k": 0.15707963267948966, "x_0": -25},
    "time": {"T": 50, "n_steps": 5000}
}"#;

fn wgqed(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.json");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn renorm_row(out: &Output) -> Vec<String> {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("omega_0,gamma,lambda_ir,lambda_uv,omega_A,Gamma,f,H,valid")
    );
    lines
        .next()
        .unwrap()
        .split(',')
        .map(str::to_string)
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn renorm_forward_symmetric_window() {
    let out = wgqed(&[
        "renorm",
        "--omega0",
        "31.4159",
        "--gamma",
        "3.14159",
        "--lambda-ir",
        "0",
        "--lambda-uv",
        "62.8318",
    ]);
    assert!(out.status.success());
    let row = renorm_row(&out);
    assert!((num(&row[4]) - 31.4159).abs() < 1e-3);
    assert!((num(&row[5]) - 3.2446).abs() < 1e-3);
    assert_eq!(row[8], "true");
}

#[test]
fn renorm_inverse_centered_window() {
    let out = wgqed(&[
        "renorm",
        "--omega-a",
        "31.4159",
        "--gamma-phys",
        "3.14159",
        "--half-width",
        "15.70796",
    ]);
    assert!(out.status.success());
    let row = renorm_row(&out);
    assert!((num(&row[1]) - 2.9537).abs() < 1e-3);
    assert!((num(&row[2]) - 15.708).abs() < 1e-3);
    assert!((num(&row[3]) - 47.124).abs() < 1e-3);
}

#[test]
fn renorm_invalid_region_exits_2() {
    let out = wgqed(&[
        "renorm",
        "--omega0",
        "10",
        "--gamma",
        "10",
        "--lambda-ir",
        "9",
        "--lambda-uv",
        "11",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("pi*H"), "{err}");
}

#[test]
fn malformed_input_exits_1() {
    assert_eq!(wgqed(&["renorm", "--omega0", "abc"]).status.code(), Some(1));
    assert_eq!(wgqed(&["renorm", "--omega0", "1"]).status.code(), Some(1));
    assert_eq!(
        wgqed(&[
            "renorm",
            "--omega0",
            "20",
            "--gamma",
            "1",
            "--lambda-ir",
            "0",
            "--lambda-uv",
            "10"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(wgqed(&["scatter"]).status.code(), Some(1));
}

#[test]
fn unknown_config_key_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &BASELINE.replace("\"n_steps\"", "\"n_step\""));
    let out_dir = dir.path().join("out");
    let out = wgqed(&[
        "scatter",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out_dir.join("summary.json").exists());
}

#[test]
fn baseline_scatter_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASELINE);
    let out_dir = dir.path().join("out");
    let out = wgqed(&[
        "scatter",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
        "--record-every",
        "50",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let summary: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    let r = summary["result"]["final_R"].as_f64().unwrap();
    assert!((r - 0.99).abs() <= 0.01, "R = {r}");
    assert_eq!(summary["status"], "ok");
    assert!((summary["provenance"]["gamma_phys"].as_f64().unwrap() - 3.2449).abs() < 1e-3);
    assert_eq!(summary["config"]["time"]["n_steps"], 5000);

    let traj = fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    assert_eq!(traj.lines().count(), 1 + 5000 / 50 + 1);
    assert!(out_dir.join("final_state.csv").exists());
}

#[test]
fn sweep_over_six_windows_writes_six_tables() {
    let dir = tempfile::tempdir().unwrap();
    let pi = std::f64::consts::PI;
    let windows: Vec<[f64; 2]> = [5.0, 7.5, 10.0]
        .iter()
        .flat_map(|&h| {
            [
                [10.0 * pi - h * pi, 10.0 * pi + h * pi],
                [0.0, 10.0 * pi + h * pi],
            ]
        })
        .collect();
    let mut cfg: Value = serde_json::from_str(BASELINE).unwrap();
    cfg["time"] = serde_json::json!({"T": 50, "n_steps": 2000});
    cfg["sweep"] =
        serde_json::json!({"variable": "omega_p", "values": [10.0 * pi], "windows": windows});
    let cfg = write_config(dir.path(), &cfg.to_string());
    let out_dir = dir.path().join("out");
    let out = wgqed(&[
        "sweep",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
        "--threads",
        "2",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for i in 0..6 {
        let table = fs::read_to_string(out_dir.join(format!("window_{i}/sweep.csv"))).unwrap();
        let mut lines = table.lines();
        assert_eq!(lines.next(), Some("omega_p,R_sim,R_th_bare,R_phys"));
        assert_eq!(lines.count(), 1);
    }
    assert!(out_dir.join("summary.json").exists());
}

#[test]
fn output_under_a_file_exits_1_without_partial_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASELINE);
    let blocker = dir.path().join("blocker");
    fs::write(&blocker, "x").unwrap();
    let out = wgqed(&[
        "scatter",
        "--config",
        &cfg,
        "--out",
        blocker.join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let names: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(names.len(), 2, "{names:?}");
}

#[test]
fn grid_info_reports_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASELINE);
    let out = wgqed(&["grid-info", "--config", &cfg, "--n-excitations", "1"]);
    assert!(out.status.success());
    let info: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(info["grid"]["n_modes"], 1001);
}

#[test]
fn decay_fit_matches_prediction() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg: Value = serde_json::from_str(BASELINE).unwrap();
    cfg["time"] = serde_json::json!({"T": 2.5, "n_steps": 500});
    cfg["decay"] = serde_json::json!({"fit_window": [0.25, 2.0]});
    let cfg = write_config(dir.path(), &cfg.to_string());
    let out_dir = dir.path().join("out");
    let out = wgqed(&[
        "decay",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    let gamma = summary["result"]["gamma_fit"].as_f64().unwrap();
    assert!((gamma / 3.2449 - 1.0).abs() < 0.02, "Gamma = {gamma}");
}

#[test]
fn cli_uses_only_experiments_and_renorm() {
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("src");
    for entry in fs::read_dir(src).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        for (i, _) in text.match_indices("wgqed_core::") {
            let rest = &text[i + "wgqed_core::".len()..];
            assert!(
                rest.starts_with("experiments") || rest.starts_with("renorm"),
                "{}: {}",
                path.display(),
                &rest[..rest.len().min(40)]
            );
        }
    }
}

#[test]
fn converge_writes_table_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"converge": {"omega_a": 31.41592653589793, "gamma_phys": 3.141592653589793,
                  "half_widths": [3.141592653589793], "omega_p": [31.41592653589793],
                  "n_steps": [100, 400, 1600]}}"#;
    let cfg = write_config(dir.path(), cfg);
    let out_dir = dir.path().join("out");
    let out = wgqed(&[
        "converge",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = fs::read_to_string(out_dir.join("convergence.csv")).unwrap();
    assert!(table.starts_with("half_width,omega_p,n_steps,R_sim,R_phys,within_band,diverged"));
    assert_eq!(table.lines().count(), 4);
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert!(
        (summary["result"]["bare"][0]["gamma"].as_f64().unwrap() - {
            let pi = std::f64::consts::PI;
            pi * pi / (pi + 1.0)
        })
        .abs()
            < 1e-9
    );
}
