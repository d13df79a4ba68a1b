use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn gchlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gchlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn example(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("examples")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn write_cfg(dir: &Path, body: &str) -> String {
    let p = dir.join("run.cfg");
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const SMALL: &str = "[run]\nseed = 1\n\
    [grid]\nhalf_length = 20.0\nn_points = 256\n\
    [time]\ndt = 0.01\nt_end = 0.1\n\
    [initial_data]\nkind = \"gaussian\"\namplitude = 0.2\nwidth = 1.0\n";

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(gchlab(&["--help"]).status.code(), Some(0));
    let v = gchlab(&["--version"]);
    assert_eq!(v.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&v.stdout).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(gchlab(&[]).status.code(), Some(1));
    assert_eq!(gchlab(&["simulate"]).status.code(), Some(1));
    assert_eq!(gchlab(&["frobnicate", "--config", "x"]).status.code(), Some(1));
    assert_eq!(gchlab(&["norms", "--config", "/does/not/exist.cfg"]).status.code(), Some(1));
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o").to_string_lossy().into_owned();
    for bad in [
        SMALL.replace("n_points = 256", "n_points = 300"),
        SMALL.replace("width = 1.0", "width = 1.0\ncolour = 3"),
        SMALL.replace("kind = \"gaussian\"", "kind = \"sawtooth\""),
        SMALL.replace("[run]\nseed = 1", "[run]\nseed = 1\nexperiment = \"nonexistent\""),
        "this is not toml [".to_string(),
    ] {
        let cfg = write_cfg(dir.path(), &bad);
        let cmd = if bad.contains("nonexistent") { "experiment" } else { "norms" };
        let o = gchlab(&[cmd, "--config", &cfg, "--out", &out]);
        assert_eq!(o.status.code(), Some(1), "{bad}\n{}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn norms_prints_the_initial_norm() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), &SMALL.replace("width = 1.0", "width = 1.0\nbesov_target = 0.25"));
    let out = dir.path().join("n");
    let o = gchlab(&["norms", "--config", &cfg, "--out", out.to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8(o.stdout).unwrap();
    let line = stdout.lines().next().unwrap();
    let v: f64 = line.strip_prefix("besov_norm_m0 = ").unwrap().parse().unwrap();
    assert!((v - 0.25).abs() < 1e-14);
    for f in ["besov_sequence.csv", "filter_bank.csv", "initial_fields.csv", "report.json"] {
        assert!(out.join(f).is_file(), "{f}");
    }
}

#[test]
fn simulate_writes_series_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), SMALL);
    let out = dir.path().join("s");
    let o = gchlab(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("trajectory.csv").is_file());
    assert!(out.join("fields/snapshot_00010.csv").is_file());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    for key in ["name", "config", "verdicts", "series_files", "fitted"] {
        assert!(report.get(key).is_some(), "report lacks {key}");
    }
    assert_eq!(report["name"], "simulate");
    // wall time stays out of the report so reruns are byte-identical
    assert!(report.get("runtime_s").is_none());
    let timing: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("timing.json")).unwrap()).unwrap();
    assert!(timing["runtime_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn failed_verdicts_exit_two() {
    // the steep peakon breaches y_xi >= 1/2
    let dir = tempfile::tempdir().unwrap();
    let out: PathBuf = dir.path().join("p");
    let o = gchlab(&["lagrange", "--config", &example("peakon.cfg"), "--out", out.to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(2));
    let b: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("breaking.json")).unwrap()).unwrap();
    assert_eq!(b["breached"], true);
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let body = SMALL.replace(
        "kind = \"gaussian\"\namplitude = 0.2\nwidth = 1.0",
        "kind = \"band_limited_random\"\namplitude = 0.2\nmax_block = 2",
    );
    let cfg = write_cfg(dir.path(), &body);
    let run = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        let o = gchlab(&["norms", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", seed, "--quiet"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out.join("initial_fields.csv")).unwrap()
    };
    assert_eq!(run("7", "a"), run("7", "b"));
    assert_ne!(run("7", "a"), run("8", "c"));
}

#[test]
fn every_shipped_config_parses() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) == Some("cfg") {
            let cfg = gchlab::harness::RunConfig::from_path(&path)
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            cfg.initial_fields().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 10);
}
