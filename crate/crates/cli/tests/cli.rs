use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cds_core::io::{fmt_f64, EstimateDocument};
use cds_core::sweeps::{plane_cell, PlaneGrid};
use cds_core::{cesium_ratio, SystemParams};

fn cds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cds"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = cds(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn error_category(out: &Output) -> String {
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    v["error"]["category"].as_str().unwrap().to_string()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn scan_plane_full_grid_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("plane.csv");
    ok(&["scan-plane", "--out", path_str(&out)]);
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "g_q_over_kappa,g_a_over_kappa,g_b_over_kappa,D,C,P_a,P_b,P_CD"
    );
    assert_eq!(lines.len(), 1 + 100 * 100);

    // cell (g_q, g_a) = (0.01, 0.05): row 9 * 100 + 49
    let g_q = PlaneGrid::node(0.1, 100, 9);
    let g_a = PlaneGrid::node(0.1, 100, 49);
    assert_eq!((g_q, g_a), (0.01, 0.05));
    let cell = plane_cell(&SystemParams::new(g_q, g_a, cesium_ratio() * g_a).unwrap()).unwrap();
    let expected: Vec<String> = [
        cell.g_q,
        cell.g_a,
        cell.g_b,
        cell.d,
        cell.c,
        cell.p_a,
        cell.p_b,
        cell.p_dark,
    ]
    .into_iter()
    .map(fmt_f64)
    .collect();
    assert_eq!(lines[1 + 9 * 100 + 49], expected.join(","));
}

#[test]
fn outputs_are_byte_identical() {
    for args in [
        &["curve", "--grid", "15", "--seed", "3"][..],
        &["scan-plane", "--grid", "7x5"][..],
        &[
            "error-scaling",
            "--n-grid",
            "1000,10000",
            "--repetitions",
            "20",
            "--seed",
            "5",
        ][..],
        &["simulate", "--horizon", "50", "--samples", "20"][..],
    ] {
        assert_eq!(ok(args), ok(args), "{args:?}");
    }
    assert_ne!(
        ok(&["curve", "--grid", "15", "--seed", "3"]),
        ok(&["curve", "--grid", "15", "--seed", "4"])
    );
}

#[test]
fn curve_is_sorted_single_valued() {
    let text = ok(&["curve", "--grid", "40"]);
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 40);
    let d: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    let r: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(d.windows(2).all(|w| w[0] < w[1]));
    assert!(r.windows(2).all(|w| w[0] > w[1]));
}

#[test]
fn estimate_example_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("est.json");
    ok(&[
        "estimate",
        "--n-a",
        "100",
        "--n-b",
        "900",
        "--n-dark",
        "40",
        "--r-a",
        "0.14907",
        "--out",
        path_str(&first),
    ]);
    let text = fs::read_to_string(&first).unwrap();
    let doc: EstimateDocument = serde_json::from_str(&text).unwrap();
    assert_eq!(doc.schema_version, 1);
    assert_eq!(doc.estimate.d_hat, 0.8);
    assert!((doc.estimate.c_hat - 0.766).abs() < 5e-4);
    assert_eq!(doc.record.n_dark, 40);

    let second = ok(&["estimate", "--record", path_str(&first), "--r-a", "0.14907"]);
    assert_eq!(second, text);
}

#[test]
fn error_scaling_json_summary() {
    let text = ok(&[
        "error-scaling",
        "--n-grid",
        "10000,100000",
        "--repetitions",
        "60",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema_version"], 1);
    let p = v["fit"]["exponent"].as_f64().unwrap();
    assert!((p + 0.5).abs() < 0.15, "exponent {p}");
    assert!((v["true_c"].as_f64().unwrap() - 0.995).abs() < 1e-12);
}

#[test]
fn config_precedence_and_strictness() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("p.cfg");
    fs::write(&cfg, "# reference\ng_a = 0.05\ng_q = 0.01\n").unwrap();
    let via_flag = ok(&[
        "scan-plane",
        "--grid",
        "2",
        "--config",
        path_str(&cfg),
        "--g-a",
        "0.06",
    ]);
    let direct = ok(&[
        "scan-plane",
        "--grid",
        "2",
        "--g-a",
        "0.06",
        "--g-q",
        "0.01",
    ]);
    assert_eq!(via_flag, direct);

    fs::write(&cfg, "g_q = 0.01\ng_c = 0.3\n").unwrap();
    let out = cds(&["scan-plane", "--config", path_str(&cfg)]);
    assert_eq!(out.status.code(), Some(14));
    assert_eq!(error_category(&out), "config");
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("g_c") && msg.contains("line 2"), "{msg}");

    fs::write(&cfg, "units = absolute\n").unwrap();
    let out = cds(&["scan-plane", "--config", path_str(&cfg), "--units", "kappa"]);
    assert_eq!(error_category(&out), "config");
}

#[test]
fn domain_errors_have_distinct_codes() {
    let out = cds(&["estimate", "--n-a", "1", "--n-b", "1000"]);
    assert_eq!(out.status.code(), Some(11));
    assert_eq!(error_category(&out), "estimation");

    let out = cds(&["scan-plane", "--g-a=-1"]);
    assert_eq!(out.status.code(), Some(10));
    assert_eq!(error_category(&out), "domain");

    let out = cds(&["simulate", "--horizon", "10", "--dt", "1e-300"]);
    assert_eq!(error_category(&out), "integration");
    assert_eq!(out.status.code(), Some(12));

    let out = cds(&["scan-plane", "--grid", "1"]);
    assert_eq!(error_category(&out), "config");

    let out = cds(&["scan-plane", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_category(&out), "usage");
}

#[test]
fn unwritable_output_fails_before_computing() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("no/such/dir/out.csv");
    let out = cds(&["error-scaling", "--out", path_str(&missing)]);
    assert_eq!(out.status.code(), Some(15));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("no/such/dir"), "{msg}");
}

#[test]
fn simulate_emits_every_route() {
    let text = ok(&["simulate", "--horizon", "100", "--samples", "10"]);
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    for col in [
        "full_re_q",
        "reduced_q",
        "decaying_q",
        "cavity_re_alpha",
        "emitted_a",
    ] {
        assert!(header.contains(&col), "missing {col}");
    }
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert!(rows.len() >= 10);
    assert!(rows.iter().all(|r| r.split(',').count() == header.len()));

    let amps = ok(&[
        "simulate",
        "--horizon",
        "100",
        "--samples",
        "10",
        "--amplitudes-only",
    ]);
    assert!(amps
        .starts_with("t,re_q,im_q,re_a,im_a,re_b,im_b,re_alpha,im_alpha,re_beta,im_beta,norm2\n"));
}
