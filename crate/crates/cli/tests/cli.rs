use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cdsupport::christoffel::{fit, ChristoffelModel, FitOptions};
use cdsupport::geometry::{sample_shape, ShapeSpec};
use cdsupport::PointSet;

fn cdsupport(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdsupport"))
        .args(args)
        .env_remove("CDSUPPORT_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn write_points(path: &Path, pts: &PointSet) {
    let mut text = String::new();
    for row in pts.iter() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    fs::write(path, text).unwrap();
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn fit_then_score_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let sample = sample_shape(&ShapeSpec::unit_disk(), 800, 0.0, 11).unwrap();
    let query = PointSet::from_rows(&[[0.0, 0.0], [0.5, -0.2], [1.5, 1.5]]).unwrap();
    let (pts, q, model) = (dir.path().join("pts.csv"), dir.path().join("q.csv"), dir.path().join("model.bin"));
    write_points(&pts, &sample);
    write_points(&q, &query);

    let out = cdsupport(&["fit", "--input", p(&pts), "--degree", "4", "--out", p(&model)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = cdsupport(&["score", "--model", p(&model), "--input", p(&q)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let printed: Vec<f64> = String::from_utf8(out.stdout).unwrap().lines().map(|l| l.parse().unwrap()).collect();
    // The CSV text round-trips the sample exactly, so the fits agree.
    let direct = fit(&sample, 4, &FitOptions::default()).unwrap().scores(&query).unwrap();
    assert_eq!(printed.len(), 3);
    for (a, b) in printed.iter().zip(&direct) {
        assert!((a - b).abs() <= 1e-12 * b.abs(), "{a} vs {b}");
    }
    assert!(printed[0] > printed[2]);
    let loaded = ChristoffelModel::load(&model).unwrap();
    assert_eq!(loaded.degree(), 4);
}

#[test]
fn estimate_writes_contours() {
    let dir = tempfile::tempdir().unwrap();
    let sample = sample_shape(&ShapeSpec::planar_annulus(), 2000, 0.0, 5).unwrap();
    let (pts, model, contours) =
        (dir.path().join("pts.csv"), dir.path().join("model.bin"), dir.path().join("out.csv"));
    write_points(&pts, &sample);
    assert_eq!(cdsupport(&["fit", "--input", p(&pts), "--out", p(&model)]).status.code(), Some(0));
    let out = cdsupport(&[
        "estimate", "--model", p(&model), "--gamma", "auto", "--box", "auto", "--res", "128", "--contours", p(&contours),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = fs::read_to_string(&contours).unwrap();
    assert!(text.starts_with("x,y,ring_id\n"));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["rings"], 2);

    let out = cdsupport(&["estimate", "--model", p(&model), "--gamma", "-1"]);
    assert_eq!(out.status.code(), Some(1));
    let out = cdsupport(&["estimate", "--model", p(&model), "--box", "0,0:1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn contours_need_a_planar_model() {
    let dir = tempfile::tempdir().unwrap();
    let sample = sample_shape(&ShapeSpec::ball(vec![0.0; 3], 1.0).unwrap(), 300, 0.0, 1).unwrap();
    let (pts, model) = (dir.path().join("pts.csv"), dir.path().join("model.bin"));
    write_points(&pts, &sample);
    assert_eq!(cdsupport(&["fit", "--input", p(&pts), "--degree", "2", "--out", p(&model)]).status.code(), Some(0));
    let out = cdsupport(&["estimate", "--model", p(&model), "--res", "8", "--contours", p(&dir.path().join("c.csv"))]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn verify_bounds_passes() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("bounds.json");
    let out = cdsupport(&["verify-bounds", "--out", p(&json)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8(out.stdout).unwrap().contains(", 0 violated"));
    let reports: Vec<serde_json::Value> = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    assert!(reports.iter().all(|r| r["satisfied"] == true));
}

#[test]
fn usage_errors_exit_one() {
    let out = cdsupport(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("Usage"));
    assert_eq!(cdsupport(&["fit", "--bogus"]).status.code(), Some(1));
    assert_eq!(cdsupport(&[]).status.code(), Some(1));
    assert_eq!(cdsupport(&["--help"]).status.code(), Some(0));
}

#[test]
fn input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.bin");
    let missing = dir.path().join("missing.csv");
    assert_eq!(cdsupport(&["fit", "--input", p(&missing), "--out", p(&model)]).status.code(), Some(2));

    let ragged = dir.path().join("ragged.csv");
    fs::write(&ragged, "0,1\n2\n").unwrap();
    let out = cdsupport(&["fit", "--input", p(&ragged), "--out", p(&model)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));

    let header = dir.path().join("header.csv");
    fs::write(&header, "x,y\n0,1\n1,0\n").unwrap();
    assert_eq!(cdsupport(&["fit", "--input", p(&header), "--out", p(&model)]).status.code(), Some(1));
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "resolution = 48\nseeds = [3]\n").unwrap();
    let out = cdsupport(&[
        "synthetic-support", "--n", "400", "--resolution", "32", "--config", p(&cfg), "--out-dir", p(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("synthetic_support.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["resolution"], 48);
    assert_eq!(report["body"]["rows"][0]["seed"], 3);
    assert!(dir.path().join("contours_n400_s3.csv").exists());
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_cdsupport"))
        .args(["outlier-bench", "--generator", "separable", "--degrees", "4", "--seeds", "0,1"])
        .env("CDSUPPORT_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("outlier.json")).unwrap()).unwrap();
    let summary = report["body"]["summary"].as_array().unwrap();
    let christoffel = summary.iter().find(|s| s["method"] == "christoffel-d4").unwrap();
    assert_eq!(christoffel["median"], 1.0);
    assert!(dir.path().join("outlier.csv").exists());
}

#[test]
fn studies_validate_their_configs() {
    let dir = tempfile::tempdir().unwrap();
    let d = p(dir.path());
    assert_eq!(cdsupport(&["convergence-study", "--n", "100,200", "--out-dir", d]).status.code(), Some(1));
    assert_eq!(cdsupport(&["concentration-study", "--reps", "10", "--out-dir", d]).status.code(), Some(1));
    assert_eq!(cdsupport(&["concentration-study", "--r", "0.5", "--out-dir", d]).status.code(), Some(1));
    assert_eq!(cdsupport(&["outlier-bench", "--out-dir", d]).status.code(), Some(1));
    let out = cdsupport(&[
        "concentration-study", "--p", "1", "--degrees", "2", "--n", "1000", "--reps", "100", "--out-dir", d,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(dir.path().join("concentration.csv").exists());
}
