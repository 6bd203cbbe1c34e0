use std::collections::HashMap;
use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn regkernel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regkernel"))
        .args(args)
        .env_remove("REGKERNEL_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = regkernel(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Parses a CSV by its header, checking every row has the header's width.
fn columns(csv: &str) -> HashMap<String, Vec<f64>> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let mut cols: HashMap<String, Vec<f64>> =
        header.iter().map(|h| (h.to_string(), Vec::new())).collect();
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), header.len(), "row {line:?}");
        for (h, c) in header.iter().zip(cells) {
            cols.get_mut(*h).unwrap().push(c.parse().unwrap());
        }
    }
    cols
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn sample_at_origin() {
    let csv = stdout_ok(&[
        "sample",
        "--dim",
        "2",
        "--epsilon",
        "0.5",
        "--n",
        "0",
        "--r",
        "0",
    ]);
    let value = columns(&csv)["value"][0];
    let expected = -(0.5f64).ln() / (2.0 * std::f64::consts::PI);
    assert!(rel(value, expected) < 1e-14, "{value}");
}

#[test]
fn sample_profile_has_requested_count() {
    let csv = stdout_ok(&[
        "sample",
        "--dim",
        "3",
        "--epsilon",
        "0.1",
        "--n",
        "4",
        "--r-max",
        "2",
        "--count",
        "11",
        "--quantity",
        "laplacian",
    ]);
    let cols = columns(&csv);
    assert_eq!(cols["r"].len(), 11);
    assert_eq!(cols["r"][10], 2.0);
    // the singular profile skips the origin
    let csv = stdout_ok(&["sample", "--dim", "3", "--r-max", "2", "--count", "11"]);
    assert_eq!(columns(&csv)["r"].len(), 10);
}

#[test]
fn smoothing_table_matches_three_dimensional_column() {
    let csv = stdout_ok(&[
        "tables",
        "--mode",
        "smoothing",
        "--dim",
        "3",
        "--target",
        "1e-2",
        "--n",
        "0,1,2,4,10",
    ]);
    let cols = columns(&csv);
    let expected = [5.0189e-3, 1.0001e-2, 1.3333e-2, 1.8286e-2, 2.8378e-2];
    assert_eq!(cols["n"], vec![0.0, 1.0, 2.0, 4.0, 10.0]);
    for (eps, want) in cols["epsilon"].iter().zip(expected) {
        assert!(rel(*eps, want) < 1e-4, "{eps} vs {want}");
    }
    for e in &cols["achieved_error"] {
        assert!(rel(*e, 1e-2) < 1e-6);
    }
}

#[test]
fn modelling_table_as_json() {
    let out = stdout_ok(&[
        "tables",
        "--mode",
        "modelling",
        "--dim",
        "1",
        "--target",
        "4.89e-6",
        "--n",
        "1",
        "--format",
        "json",
    ]);
    let v: Value = serde_json::from_str(&out).unwrap();
    let eps = v["rows"][0]["epsilon"].as_f64().unwrap();
    assert!(rel(eps, 2.0001e-2) < 1e-3, "{eps}");
}

#[test]
fn orbit_reports_four_metrics() {
    let out = stdout_ok(&["orbit", "--n", "4", "--dt", "1.58e-3", "--format", "json"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    let m = &v["metrics"];
    let get = |k: &str| m[k].as_f64().unwrap_or_else(|| panic!("missing {k}"));
    assert!(rel(get("dt"), 1.58e-3) < 1e-2);
    assert!(rel(get("period_error"), 9.99e-3) < 0.1);
    assert!(rel(get("hamiltonian_error"), 3.65e-7) < 1.0);
    assert!(rel(get("modelling_error"), 2.50e-7) < 1.0);
}

#[test]
fn dump_config_round_trips_through_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 4] = [
        &[
            "converge", "--preset", "osc2d", "--n", "0,4", "--t-end", "2",
        ],
        &[
            "simulate",
            "--preset",
            "random25",
            "--seed",
            "3",
            "--dt",
            "0.01",
            "--epsilon",
            "0.02",
        ],
        &["orbit", "--n", "10", "--dt", "2.29e-3", "--scan"],
        &["sample", "--dim", "1", "--r", "0.5,1", "--format", "json"],
    ];
    for args in cases {
        let first = stdout_ok(&[&["--dump-config"], args].concat());
        let path = dir.path().join("cfg.json");
        fs::write(&path, &first).unwrap();
        let second = stdout_ok(&["--dump-config", "--config", path.to_str().unwrap()]);
        assert_eq!(first, second);
    }
}

#[test]
fn config_file_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    fs::write(
        &path,
        r#"{"command": "sample", "dim": 2, "epsilon": 0.5, "r": [0.0], "format": "json"}"#,
    )
    .unwrap();
    let v: Value = serde_json::from_str(&stdout_ok(&["--config", path.to_str().unwrap()])).unwrap();
    assert!(rel(v["samples"][0]["value"].as_f64().unwrap(), 1.103178e-1) < 1e-6);
}

#[test]
fn env_var_redirects_relative_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_regkernel"))
        .args([
            "phase",
            "--epsilon",
            "5.6755e-2",
            "--n",
            "10",
            "--t-end",
            "4",
            "--out",
            "sub/phase.csv",
        ])
        .env("REGKERNEL_OUT_DIR", dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(dir.path().join("sub/phase.csv")).unwrap();
    let cols = columns(&csv);
    assert_eq!(cols["t"][0], 0.0);
    assert_eq!(cols["z"].len(), cols["zdot"].len());
    assert!(cols["z"].len() > 100);
}

#[test]
fn simulate_csv_has_position_columns() {
    let csv = stdout_ok(&[
        "simulate",
        "--preset",
        "five_body",
        "--epsilon",
        "1.8286e-2",
        "--n",
        "4",
        "--dt",
        "0.01",
        "--t-end",
        "0.1",
        "--positions",
    ]);
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("t,H_reg,H_err_vs_reg0,H_err_vs_exact0,x0,y0,z0"));
    let cols = columns(&csv);
    assert_eq!(cols.len(), 4 + 15);
    assert_eq!(cols["t"].len(), 11);
    assert!(cols["H_err_vs_reg0"].iter().all(|e| *e < 1e-3));
}

#[test]
fn converge_writes_one_file_per_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("conv");
    stdout_ok(&[
        "converge",
        "--n",
        "1,10",
        "--singular",
        "--dt",
        "0.25,0.125,0.0625,0.03125",
        "--t-end",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    for name in [
        "convergence_n1.csv",
        "convergence_n10.csv",
        "convergence_singular.csv",
    ] {
        let cols = columns(&fs::read_to_string(out.join(name)).unwrap());
        assert_eq!(cols["dt"], vec![0.25, 0.125, 0.0625, 0.03125]);
    }
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    let rows = summary.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows
        .iter()
        .all(|r| r.get("fitted_order").is_some() && r.get("plateau").is_some()));
}

#[test]
fn invalid_input_fails_with_a_json_error() {
    let cases: [(&[&str], &str); 4] = [
        (
            &[
                "tables",
                "--mode",
                "smoothing",
                "--dim",
                "4",
                "--target",
                "1e-2",
            ],
            "dim",
        ),
        (&["simulate", "--preset", "osc1d", "--dt=-0.1"], "dt"),
        (&["sample", "--dim", "3", "--r", "0"], "r = 0"),
        (&["orbit", "--dt", "0.01", "--epsilon=0"], "epsilon"),
    ];
    for (args, field) in cases {
        let out = regkernel(args);
        assert!(!out.status.success(), "{args:?}");
        let err: Value = serde_json::from_slice(&out.stderr)
            .unwrap_or_else(|_| panic!("{}", String::from_utf8_lossy(&out.stderr)));
        let msg = err["error"].as_str().unwrap();
        assert!(msg.contains(field), "{args:?}: {msg}");
    }
    // clap's own usage errors also exit nonzero
    assert!(!regkernel(&["simulate", "--bogus"]).status.success());
}
