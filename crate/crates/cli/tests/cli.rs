use std::path::Path;
use std::process::{Command, Output};

use lptransport::fields::{cosine, shifted};
use lptransport::spectral::snapshot;
use lptransport::TorusGrid;
use serde_json::Value;

fn lpt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpt")).args(args).output().expect("runs")
}

fn ok(args: &[&str]) -> String {
    let out = lpt(args);
    assert!(out.status.success(), "lpt {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write_cosine(dir: &Path, name: &str, n: usize) -> String {
    let path = dir.join(name);
    snapshot::write(&path, &cosine(TorusGrid::new(1, n).unwrap(), 4)).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn norms_reproduce_cosine_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_cosine(dir.path(), "cos.lptf", 64);
    let json: Value = serde_json::from_str(&ok(&["norms", "--input", &f, "--a", "1", "--flavors", "block,highpass,logsum"])).unwrap();
    let pi = std::f64::consts::PI;
    let block = json["norms"]["block"]["value"].as_f64().unwrap();
    let high = json["norms"]["highpass"]["value"].as_f64().unwrap();
    let logsum = json["norms"]["logsum"]["value"].as_f64().unwrap();
    assert!((block - 3.0 * pi.sqrt()).abs() < 1e-10 * block);
    assert!((high - (6.0 * pi).sqrt()).abs() < 1e-10 * high);
    assert!((logsum - pi.sqrt() * 5f64.ln()).abs() < 1e-10 * logsum);
}

#[test]
fn decompose_writes_blocks_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_cosine(dir.path(), "cos.lptf", 64);
    let out = dir.path().join("blocks");
    ok(&["lp", "decompose", "--input", &f, "--a", "1", "--out", out.to_str().unwrap()]);
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let blocks = manifest["blocks"].as_array().unwrap();
    assert_eq!(blocks.len(), 5);
    let total: f64 = blocks.iter().map(|b| b["energy"].as_f64().unwrap()).sum();
    assert!(total > 0.0);
    let b3 = snapshot::read(out.join(blocks[2]["file"].as_str().unwrap())).unwrap();
    assert_eq!(b3.grid().n(), 64);
}

#[test]
fn solve_writes_one_row_per_sample() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    ok(&[
        "solve", "--model", "zero", "--kappa", "0.01", "--n", "32", "--dim", "1", "--dt", "0.01", "--tend", "1", "--ic", "harmonic:4",
        "--observe", "l2,linf,besov:a=0.9,hminus1", "--samples", "10", "--csv", csv.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,l2,linf,besov_block_a0.9,hminus1");
    assert_eq!(lines.len(), 12);
    let last: Vec<f64> = lines[11].split(',').map(|v| v.parse().unwrap()).collect();
    let expected = std::f64::consts::PI.sqrt() * (-16.0f64 * 0.01).exp();
    assert!((last[1] - expected).abs() < 1e-10);
}

#[test]
fn solve_rejects_cfl_violations() {
    let out = lpt(&["solve", "--model", "uniform:100,0", "--n", "32", "--dt", "0.1", "--tend", "1", "--ic", "harmonic:1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("CFL"));
}

#[test]
fn otdist_of_a_shift() {
    let dir = tempfile::tempdir().unwrap();
    let grid = TorusGrid::new(1, 32).unwrap();
    let a = cosine(grid, 1);
    let b = shifted(&a, [1, 0]);
    let (pa, pb) = (dir.path().join("a.lptf"), dir.path().join("b.lptf"));
    snapshot::write(&pa, &a).unwrap();
    snapshot::write(&pb, &b).unwrap();
    let json = dir.path().join("ot.json");
    ok(&["otdist", "--a", pa.to_str().unwrap(), "--b", pb.to_str().unwrap(), "--delta", "0.1", "--json", json.to_str().unwrap()]);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert!(r["distance"].as_f64().unwrap() > 0.0);
    assert!(r["gap"].as_f64().unwrap().abs() < 1e-8);
    let same = ok(&["otdist", "--a", pa.to_str().unwrap(), "--b", pa.to_str().unwrap(), "--delta", "0.1"]);
    let r: Value = serde_json::from_str(&same).unwrap();
    assert_eq!(r["distance"].as_f64().unwrap(), 0.0);
}

#[test]
fn experiment_subcommands_emit_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("reg.toml");
    let csv = dir.path().join("reg.csv");
    let json = dir.path().join("reg.json");
    std::fs::write(
        &cfg,
        format!(
            r#"
kind = "regularity"
dim = 1
n = 32
a = 1.0
p = 4.0
t_end = 0.5
dt = 0.01
samples = 5

[velocity]
kind = "uniform"
c = [0.5, 0.0]

[initial]
kind = "harmonic"
wavevector = [4, 0]

[output]
csv = "{}"
json = "{}"
"#,
            csv.display(),
            json.display()
        ),
    )
    .unwrap();
    let summary: Value = serde_json::from_str(&ok(&["regularity", "--config", cfg.to_str().unwrap()])).unwrap();
    assert!((summary["summary"]["sup_min_c"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 7);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["config"]["kind"], "regularity");

    // The subcommand must match the configured kind.
    let out = lpt(&["mixing", "--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
}

#[test]
fn bad_config_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "kind = \"zerodiff\"\nn = 32\na = 0.9\nkappa = [1e-3]\nt_end = 1.0\ndt = 0.01\n[velocity]\nkind = \"zero\"\n[initial]\nkind = \"harmonic\"\nwavevector = [1, 0]\n").unwrap();
    let out = lpt(&["zerodiff", "--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("decades"));
}
