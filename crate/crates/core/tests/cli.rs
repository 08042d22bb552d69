//! End-to-end runs of the binary.

use std::path::Path;
use std::process::{Command, Output};

use badlab::config::KeyValues;
use badlab::exactnum::{fmt_dyadic, parse_rat};

const GOLDEN: &str = "d = 1\nB.base = golden\npsi.alpha = 1\nR = 1\nseed = 3\n";

const CUBIC_LINE: &str = "d = 2\nA.base = cubic-pair\nA.directions = 1, 1\nB.base = cubic-pair\n\
    psi.alpha = 1/2\nphi.kind = powerlog\nphi.alpha = 1/2\nphi.delta = 2\nR = 2\n";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_badlab")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn read_json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

/// A CSV cell as a rational, or both ends of an interval `[lo,hi]`.
fn parse_cell(s: &str) -> Vec<badlab::exactnum::Rat> {
    match s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
        Some(inner) => inner.split(',').map(|x| parse_rat(x).unwrap()).collect(),
        None => vec![parse_rat(s).unwrap()],
    }
}

#[test]
fn unknown_command_is_a_usage_error() {
    let out = run(&["nosuch"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn invalid_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    // B = A, so b = a
    let cfg = write_config(dir.path(), "bad.cfg", "d = 1\nA.base = 0\nA.directions = 1\nB.base = 0\nB.directions = 1\n");
    let out = run(&["verify", "--config", &cfg, "--T", "10", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("0 ⩽ b = dim B < a = dim A"));
}

#[test]
fn verify_golden() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "golden.cfg", GOLDEN);
    let out_dir = dir.path().join("out");
    let out = run(&["verify", "--config", &cfg, "--T", "100", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = read_json(&out_dir.join("verify.json"));
    assert_eq!(v["omega_trivial"], true);
    assert_eq!(v["gamma_certified"], true);
    assert_eq!(v["pair_failures"], 0);
    // the manifest echo reproduces the hash
    let m = std::fs::read_to_string(out_dir.join("manifest.json")).unwrap();
    let kv = KeyValues::parse(&m).unwrap();
    let mv: serde_json::Value = serde_json::from_str(&m).unwrap();
    assert_eq!(mv["config_hash"].as_str().unwrap(), kv.hash());
    assert_eq!(mv["status"], "ok");
}

#[test]
fn series_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.cfg", &format!("{CUBIC_LINE}T.max = 64\n"));
    let out = run(&["series", "--config", &cfg, "--N", "100000", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rd = csv::Reader::from_path(dir.path().join("series.csv")).unwrap();
    let header: Vec<String> = rd.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["T", "mu", "lambda", "term", "partial_sum", "zeta", "pi_count", "ratio_int", "ratio_cumzeta"]);
    let mut last = String::new();
    for rec in rd.records() {
        let rec = rec.unwrap();
        for cell in rec.iter().filter(|c| !c.is_empty()) {
            let vals = parse_cell(cell);
            assert!(vals.len() == 1 || vals[0] <= vals[1], "{cell}");
        }
        last = rec[0].to_string();
    }
    assert_eq!(last, "100000");
    let s = read_json(&dir.path().join("series.json"));
    assert_eq!(s["diagnostic"]["verdict"], "converging");
}

#[test]
fn montecarlo_is_invariant_to_jobs_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{CUBIC_LINE}T.max = 16\ntail.max = 64\nsamples = 8\nX = 2000\nseries.N = 1000\nseed = 5\n");
    let cfg = write_config(dir.path(), "mc.cfg", &text);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (jobs, out_dir) in [("1", &a), ("4", &b)] {
        let out = run(&["montecarlo", "--jobs", jobs, "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["report.json", "samples.csv", "tails.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    // report.json is itself a config with the same hash
    let report = a.join("report.json");
    let kv = KeyValues::load(&report).unwrap();
    assert_eq!(read_json(&report)["config_hash"].as_str().unwrap(), kv.hash());
    let again = run(&["verify", "--config", report.to_str().unwrap(), "--T", "8", "--out", dir.path().join("c").to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(0));
    // sample coordinates are dyadic and print back identically
    let mut rd = csv::Reader::from_path(a.join("samples.csv")).unwrap();
    for rec in rd.records() {
        let rec = rec.unwrap();
        for cell in [&rec[1], &rec[2]] {
            assert!(cell.contains("/2^") || !cell.contains('/'), "{cell}");
            assert_eq!(fmt_dyadic(&parse_rat(cell).unwrap()), cell);
        }
    }
}

#[test]
fn enumerate_and_badness_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "golden.cfg", GOLDEN);
    let d = dir.path().to_str().unwrap();
    let out = run(&["enumerate", "--config", &cfg, "--T", "5", "--set", "layer", "--out", d]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = read_json(&dir.path().join("summary.json"));
    // the full line: every z_1 with |z_1| ≤ 5
    assert_eq!(s["count"], 11);
    assert_eq!(std::fs::read_to_string(dir.path().join("points.csv")).unwrap().lines().count(), 12);

    let out = run(&["badness", "--config", &cfg, "--height", "50", "--out", d]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let b = read_json(&dir.path().join("badness.json"));
    assert_eq!(b["witness"], serde_json::json!([1, 1]));
    assert_eq!(b["height"], 50);
    let gamma = parse_rat(b["gamma"].as_str().unwrap()).unwrap();
    assert!((badlab::exactnum::to_f64(&gamma) - (5f64.sqrt() - 2.0)).abs() < 1e-12);
}
