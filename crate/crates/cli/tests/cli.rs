use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use translab::curvature::CurvatureSpec;
use translab::diagnostics::diagnostics_fields;
use translab::exact::{grim_patch, GrimSpec, QuadraticGraph};
use translab::geometry::{GraphPatch, Grid};
use translab::io::{write_field_dump_csv, write_patch_csv};

fn translab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_translab"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn record(o: &Output) -> Value {
    assert_eq!(code(o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("JSON summary")
}

/// Rows of a numeric CSV; empty cells become `None`.
fn numeric_rows(path: &Path) -> Vec<Vec<Option<f64>>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| (!c.is_empty()).then(|| c.parse().unwrap())).collect())
        .collect()
}

#[test]
fn gamma_check_exit_codes() {
    let dir = TempDir::new().unwrap();
    let o = translab(dir.path(), &["gamma", "check", r#"{"kind":"Mean","n":3}"#]);
    assert_eq!(code(&o), 0);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["classification"]["normalized"]["holds"], true);

    let o = translab(dir.path(), &["gamma", "check", r#"{"kind":"SigmaKRoot","k":2,"n":2}"#, "--require", "normalized"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("normalized"));

    assert_eq!(code(&translab(dir.path(), &["gamma", "check", r#"{"kind":"Mean","#])), 2);
    assert_eq!(code(&translab(dir.path(), &["gamma", "check", "mean", "--require", "pretty"])), 2);
    assert_eq!(code(&translab(dir.path(), &["gamma", "check", "sigma2", "--n", "3", "--require", "concave"])), 0);
}

#[test]
fn grim_summary_reports_an_exact_translator() {
    let dir = TempDir::new().unwrap();
    let o = translab(dir.path(), &["--summary", "json", "grim", "--omega", "3.14159265", "--n", "2", "--res", "201"]);
    let r = record(&o);
    assert!(r["max_residual"].as_f64().unwrap() < 1e-12, "{r}");
    assert!(dir.path().join("grim.csv").exists());
    let text = translab(dir.path(), &["grim", "--omega", "3.14159265", "--n", "2", "--res", "201"]);
    assert!(String::from_utf8_lossy(&text.stdout).contains("max residual"));
}

#[test]
fn flow_on_the_grim_reaper_is_self_similar() {
    let dir = TempDir::new().unwrap();
    let r = record(&translab(dir.path(), &["--summary", "json", "flow", "--grim", "--T", "0.1", "--cfl", "0.5"]));
    assert!(r["self_similarity_error"].as_f64().unwrap() < 5e-3, "{r}");
    assert_eq!(r["final_time"], 0.1);
    let series = numeric_rows(&dir.path().join("flow_series.csv"));
    assert_eq!(series.len(), r["steps"].as_u64().unwrap() as usize + 1);
}

#[test]
fn bowl_then_diagnose_is_strictly_convex() {
    let dir = TempDir::new().unwrap();
    let r = record(&translab(dir.path(), &["--summary", "json", "bowl"]));
    assert!(r["max_residual"].as_f64().unwrap() < 1e-8);
    assert_eq!(r["tip_curvature"], 0.5);
    let patch = dir.path().join("bowl_patch.csv");
    let o = translab(dir.path(), &["diagnose", "--input", patch.to_str().unwrap(), "--spec", "mean"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("strictly convex"));
    let verdict: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("verdict.json")).unwrap()).unwrap();
    assert_eq!(verdict["branch"], "strictly convex");
}

#[test]
fn diagnose_recognises_the_cylinder() {
    let dir = TempDir::new().unwrap();
    translab(dir.path(), &["grim", "--res", "101"]);
    let input = dir.path().join("grim.csv");
    let r = record(&translab(dir.path(), &["--summary", "json", "diagnose", "--input", input.to_str().unwrap()]));
    assert_eq!(r["verdict"]["branch"], "grim-reaper-like");
}

#[test]
fn identical_inputs_give_identical_bytes() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for dir in [&a, &b] {
        assert_eq!(code(&translab(dir.path(), &["grim", "--res", "81", "--spec", "power2"])), 0);
        assert_eq!(code(&translab(dir.path(), &["bowl", "--r-max", "3", "--patch-h", "0.1"])), 0);
        let input = dir.path().join("bowl_patch.csv");
        assert_eq!(code(&translab(dir.path(), &["diagnose", "--input", input.to_str().unwrap()])), 0);
    }
    for name in ["grim.csv", "bowl_profile.csv", "bowl_patch.csv", "fields.csv", "verdict.json"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn reingested_patch_reproduces_every_diagnostic_field() {
    let dir = TempDir::new().unwrap();
    let spec = CurvatureSpec::mean(2).unwrap();
    let g = GrimSpec::new(2.0 * std::f64::consts::PI, 2).unwrap();
    let patch = grim_patch(&g, g.grid(std::f64::consts::PI / 40.0, 9).unwrap()).unwrap();
    let input = dir.path().join("input.csv");
    write_patch_csv(fs::File::create(&input).unwrap(), &patch, &spec).unwrap();

    let o = translab(dir.path(), &["diagnose", "--input", input.to_str().unwrap(), "--spec", "mean"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let direct = dir.path().join("direct.csv");
    write_field_dump_csv(fs::File::create(&direct).unwrap(), &diagnostics_fields(&patch, &spec).unwrap()).unwrap();

    let (via_cli, in_process) = (numeric_rows(&dir.path().join("fields.csv")), numeric_rows(&direct));
    assert_eq!(via_cli.len(), in_process.len());
    for (r, s) in via_cli.iter().zip(&in_process) {
        for (x, y) in r.iter().zip(s) {
            match (x, y) {
                (Some(x), Some(y)) => assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0), "{x} vs {y}"),
                (None, None) => {}
                _ => panic!("defined cells differ: {x:?} vs {y:?}"),
            }
        }
    }
}

#[test]
fn exit_codes_separate_bad_input_from_failures() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.csv");
    assert_eq!(code(&translab(dir.path(), &["residual", "--input", missing.to_str().unwrap()])), 2);

    let garbage = dir.path().join("garbage.csv");
    fs::write(&garbage, "x1,x2,u\n0,0,zero\n").unwrap();
    assert_eq!(code(&translab(dir.path(), &["diagnose", "--input", garbage.to_str().unwrap()])), 2);

    let grid = Grid::uniform(&[-0.5, -0.5], &[0.5, 0.5], 0.1).unwrap();
    let bowl = GraphPatch::from_analytic(grid, std::sync::Arc::new(QuadraticGraph::paraboloid(2).unwrap())).unwrap();
    let input = dir.path().join("paraboloid.csv");
    write_patch_csv(fs::File::create(&input).unwrap(), &bowl, &CurvatureSpec::mean(2).unwrap()).unwrap();
    let path = input.to_str().unwrap();
    assert_eq!(code(&translab(dir.path(), &["residual", "--input", path])), 0);
    assert_eq!(code(&translab(dir.path(), &["residual", "--input", path, "--tolerance", "1e-2"])), 1);
    assert_eq!(code(&translab(dir.path(), &["identity", "--input", path])), 1);
    assert_eq!(code(&translab(dir.path(), &["diagnose", "--input", path])), 1);
    assert_eq!(code(&translab(dir.path(), &["residual", "--input", path, "--spec", r#"{"kind":"Mean","n":3}"#])), 2);

    let o = translab(dir.path(), &["flow", "--grim", "--h", "0.05", "--dt", "0.1", "--T", "1"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("node"));
    assert_eq!(code(&translab(dir.path(), &["bowl", "--spec", "gauss"])), 3);
    assert_eq!(code(&translab(dir.path(), &["flow", "--grim", "--cfl", "2"])), 2);
}
