use std::fs;
use std::process::Command;

use pseudoconvex::pipeline::{PipelineConfig, VerificationReport};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pseudoconvex"))
}

fn small_config() -> PipelineConfig {
    let mut cfg = PipelineConfig::default();
    cfg.construction.profile_points = 21;
    cfg.sampling.plateau_points = 100;
    cfg.sampling.holder_pairs = 5000;
    cfg
}

#[test]
fn checked_in_default_config_matches_the_builtin() {
    let text = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/default.json")).unwrap();
    assert_eq!(PipelineConfig::from_json(&text).unwrap(), PipelineConfig::default());
    let out = bin().arg("default-config").output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), text.trim());
}

#[test]
fn construct_f_with_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    fs::write(&cfg_path, small_config().to_json().unwrap()).unwrap();
    let out_dir = dir.path().join("out");
    let status = bin()
        .args(["construct-f", "--seed", "99", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(status.success());
    let report = VerificationReport::from_json(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.seed, 99);
    assert_eq!(report.pipeline, "construct-f");
    let csv = fs::read_to_string(out_dir.join("f_profile.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x,F,dF,d2F"));
    assert_eq!(csv.lines().count(), 22);
    assert!(out_dir.join("report.txt").exists() && out_dir.join("schedule.json").exists());
}

#[test]
fn out_of_range_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg.construction.eps = 1.5;
    let path = dir.path().join("bad.json");
    fs::write(&path, cfg.to_json().unwrap()).unwrap();
    let out = bin().args(["levi-probe", "--config"]).arg(&path).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("eps"));
}

#[test]
fn cache_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let status = bin()
        .args(["bergman-scan", "--out"])
        .arg(dir.path().join("out"))
        .env("PSCVX_CACHE_DIR", &cache)
        .status()
        .unwrap();
    assert!(status.success());
    let entries = fs::read_dir(&cache).unwrap().count();
    assert_eq!(entries, 4);
    let out = dir.path().join("out");
    for name in ["bergman_inside.csv", "bergman_outside.csv", "bergman_scan.json", "kernel_oracles.csv"] {
        assert!(out.join(name).exists(), "{name}");
    }
}
