use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toeplitz-embed"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn winding_of_reciprocal_at_origin() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["winding", fixture("recip_z.json").to_str().unwrap(), "--point", "0", "0"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read(&dir.path().join("winding.json"))["winding"], -1);
}

#[test]
fn verdict_z_plus_two_fires_r1() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verdict", fixture("z_plus_2.json").to_str().unwrap(), "--p", "2", "--n", "16"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v = read(&dir.path().join("verdict.json"));
    assert_eq!(v["fired_rule"], "R1");
    assert_eq!(v["status"], "Embeddable");
    assert_eq!(v["verdict_schema"], 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains(">> R1"));
}

#[test]
fn verdict_reciprocal_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verdict", fixture("recip_z.json").to_str().unwrap(), "--n", "16"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(read(&dir.path().join("verdict.json"))["fired_rule"], "R2");
}

#[test]
fn fig8_identities_within_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["fig8", fixture("circle_arcs.json").to_str().unwrap(), "--trials", "1000"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = read(&dir.path().join("fig8.json"));
    assert!(r["identity_residual"].as_f64().unwrap() <= 1e-10);
    assert_eq!(r["identities"]["trials"], 1000);
}

#[test]
fn analysis_feeds_verdict_unchanged_and_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let a = run(&["analyze", fixture("z_plus_2_pow7.json").to_str().unwrap(), "--n", "16"], dir.path());
    assert_eq!(a.status.code(), Some(0));
    let analysis = dir.path().join("analysis.json");
    let parsed = read(&analysis);
    assert_eq!(parsed["analysis_schema"], 1);
    assert_eq!(parsed["config"]["n"], 16);
    assert_eq!(parsed["symbol"]["type"], "fourier");

    let first = dir.path().join("first");
    let second = dir.path().join("second");
    let v1 = run(&["verdict", analysis.to_str().unwrap()], &first);
    let v2 = run(&["verdict", analysis.to_str().unwrap()], &second);
    assert_eq!(v2.status.code(), Some(0));
    assert_eq!(v1.status.code(), Some(0));
    let b1 = std::fs::read(first.join("verdict.json")).unwrap();
    let b2 = std::fs::read(second.join("verdict.json")).unwrap();
    assert_eq!(b1, b2);
    let v: Value = serde_json::from_slice(&b1).unwrap();
    assert_eq!(v["fired_rule"], "R3");
    assert_eq!(v["truncation_order"], 16);
}

#[test]
fn regions_svg_is_self_contained() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["regions", fixture("recip_z.json").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let svg = std::fs::read_to_string(dir.path().join("regions.svg")).unwrap();
    assert!(svg.len() < 2_000_000);
    assert!(!svg.contains("href") && !svg.contains("@import") && !svg.contains("url(http"));
    let r = read(&dir.path().join("regions.json"));
    assert_eq!(r["components"].as_array().unwrap().len(), 2);
}

#[test]
fn semigroup_accepts_z_plus_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["semigroup", fixture("z_plus_2.json").to_str().unwrap(), "--n", "32", "--method", "dunford"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = read(&dir.path().join("semigroup.json"));
    assert_eq!(r["accepted"], true);
    assert!(r["report"]["embed_residual"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn semigroup_gate_rejects_reciprocal() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["semigroup", fixture("recip_z.json").to_str().unwrap(), "--n", "8", "--method", "dunford"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(read(&dir.path().join("semigroup.json"))["accepted"], false);
}

#[test]
fn usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["bogus"], dir.path()).status.code(), Some(64));
    let z = fixture("z_plus_2.json");
    assert_eq!(run(&["analyze", z.to_str().unwrap(), "--n", "1"], dir.path()).status.code(), Some(64));
    assert_eq!(run(&["analyze", z.to_str().unwrap(), "--grid", "300"], dir.path()).status.code(), Some(64));
    assert_eq!(run(&["analyze", z.to_str().unwrap(), "--tol", "nonsense=1"], dir.path()).status.code(), Some(64));
}

#[test]
fn bad_json_exits_65() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"type\": \"fourier\", \"coeffs\": [").unwrap();
    assert_eq!(run(&["wplus", bad.to_str().unwrap()], dir.path()).status.code(), Some(65));
    std::fs::write(&bad, "{\"type\": \"fourier\", \"coeffs\": []}").unwrap();
    assert_eq!(run(&["wplus", bad.to_str().unwrap()], dir.path()).status.code(), Some(65));
}

#[test]
fn numeric_failure_exits_70_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    // 3 = F(1) lies on the curve of z + 2
    let o = run(&["winding", fixture("z_plus_2.json").to_str().unwrap(), "--point", "3", "0"], dir.path());
    assert_eq!(o.status.code(), Some(70));
    let e = read(&dir.path().join("error.json"));
    assert_eq!(e["error"], "topology");
}

#[test]
fn help_documents_flags_and_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_toeplitz-embed")).arg("--help").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let h = String::from_utf8_lossy(&o.stdout);
    for flag in ["--n", "--p", "--grid", "--seed", "--out", "--tol", "--svg", "TOEPLITZ_EMBED_THREADS"] {
        assert!(h.contains(flag), "missing {flag}");
    }
}

#[test]
fn thread_cap_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_toeplitz-embed"))
        .env("TOEPLITZ_EMBED_THREADS", "1")
        .args(["wplus", fixture("z_minus_1.json").to_str().unwrap(), "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read(&dir.path().join("wplus.json"))["value"], 1.0);
    let bad = Command::new(env!("CARGO_BIN_EXE_toeplitz-embed"))
        .env("TOEPLITZ_EMBED_THREADS", "zero")
        .args(["wplus", fixture("z_minus_1.json").to_str().unwrap(), "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(64));
}

#[test]
fn numrange_and_plot_write_svg() {
    let dir = tempfile::tempdir().unwrap();
    let z = fixture("z_plus_2.json");
    assert_eq!(run(&["numrange", z.to_str().unwrap(), "--n", "2"], dir.path()).status.code(), Some(0));
    let r = read(&dir.path().join("numrange.json"));
    // W of [[2, 0], [1, 2]] is the disk about 2 of radius 1/2
    assert!((r["numerical_radius"].as_f64().unwrap() - 2.5).abs() < 1e-8);
    assert!(dir.path().join("numrange.svg").exists());
    assert_eq!(run(&["plot", z.to_str().unwrap()], dir.path()).status.code(), Some(0));
    assert!(dir.path().join("plot.svg").exists());
    assert_eq!(read(&dir.path().join("plot.json"))["location_of_zero"]["unbounded"], true);
}
