use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use intermap_cli::load_report;

const BIN: &str = env!("CARGO_BIN_EXE_intermap-lab");

const SCALING: &str = "experiment=scaling\nmap.kind=circle\nmap.gamma=2.0\nN=100000\nseed=1\n";
const SMALL_DENSITY: &str = "\
experiment = density
cells = 200
bins = 100
steps = 100000
N = 100
n_lo = 10
n_hi = 50

[map]
kind = hemmer
";

fn run(dir: &Path, experiment: &str, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, config).unwrap();
    Command::new(BIN)
        .arg(experiment)
        .arg("--config")
        .arg(&cfg)
        .args(extra)
        .env_remove("INTERMAP_LAB_OUT")
        .output()
        .unwrap()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap()
}

#[test]
fn scaling_passes_and_reruns_byte_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&a, &b] {
        let o = run(tmp.path(), "scaling", SCALING, &["--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["report.csv", "summary.json", "series_partition.csv"] {
        assert_eq!(read(&a, name), read(&b, name), "{name}");
    }
    let summary = load_report(&a).unwrap();
    assert!(summary.all_pass);
    assert_eq!(summary.seed, 1);
    let gap = summary.rows.iter().find(|r| r.metric == "gap_constant").unwrap();
    assert!(gap.pass && (gap.value - 4.0).abs() < 0.08);
}

#[test]
fn worker_count_does_not_change_results() {
    let tmp = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for w in ["1", "3"] {
        let out = tmp.path().join(w);
        let o = run(tmp.path(), "density", SMALL_DENSITY, &["--workers", w, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        reports.push((read(&out, "report.csv"), read(&out, "summary.json")));
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn seed_flag_overrides_config_and_changes_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run(tmp.path(), "density", SMALL_DENSITY, &["--out", a.to_str().unwrap()]);
    run(tmp.path(), "density", SMALL_DENSITY, &["--seed", "5", "--out", b.to_str().unwrap()]);
    let (ra, rb) = (load_report(&a).unwrap(), load_report(&b).unwrap());
    assert_eq!(rb.seed, 5);
    assert_ne!(ra.config_hash, rb.config_hash);
}

#[test]
fn config_violations_exit_two_and_are_listed() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), "scaling", "map.kind=circle\nmap.gamma=1.0\nbins=4\n", &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("gamma must be > 1"), "{err}");
    assert!(err.contains("`bins` is not used"), "{err}");

    let o = run(tmp.path(), "density", "map.kind=circle\nmap.gamma=2\n", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("density requires interval map"));

    let o = run(tmp.path(), "evl", SCALING, &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let o = Command::new(BIN)
        .args(["scaling", "--config", "/nonexistent/intermap.cfg"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ball_outside_half_interval_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "map.kind=circle\nmap.gamma=2\ncenters=0.9995\nr=0.001\nsamples=100\n";
    let o = run(tmp.path(), "recurrence", cfg, &["--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn failed_acceptance_check_exits_four() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let cfg = "map.kind=circle\nmap.gamma=2\nm=0\npairs=2000\n";
    let o = run(tmp.path(), "distortion", cfg, &["--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    let summary = load_report(&out).unwrap();
    assert!(!summary.all_pass);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn env_var_sets_default_output_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, SCALING).unwrap();
    let out = tmp.path().join("from-env");
    let o = Command::new(BIN)
        .arg("scaling")
        .arg("--config")
        .arg(&cfg)
        .env("INTERMAP_LAB_OUT", &out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(out.join("report.csv").exists());
    assert!(out.join("summary.json").exists());
}

#[test]
fn every_artifact_carries_the_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    run(tmp.path(), "density", SMALL_DENSITY, &["--out", out.to_str().unwrap()]);
    let hash = load_report(&out).unwrap().config_hash;
    for entry in fs::read_dir(&out).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains(&hash), "{}", path.display());
    }
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        if let Err(e) = intermap_cli::parse_config(&text) {
            panic!("{}: {e}", path.display());
        }
        seen += 1;
    }
    assert!(seen >= 5);
}
