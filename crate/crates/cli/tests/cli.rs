use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn tk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tk")).args(args).output().expect("spawn tk")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn small_simulation(dir: &Path) -> Output {
    tk(&[
        "simulate-particles",
        "--deterministic",
        "--seed",
        "5",
        "--set",
        "n_particles=24",
        "--set",
        "t_end=0.5",
        "--set",
        "snapshots=3",
        "--out",
        dir.to_str().unwrap(),
    ])
}

#[test]
fn quick_verification_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = tk(&["verify", "--quick", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(dir.path().join("verify.json").exists());
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn overcrowded_box_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = tk(&[
        "simulate-particles",
        "--set",
        "eps=1",
        "--set",
        "boundary=free",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).to_lowercase().contains("configuration"), "{}", stderr(&out));
}

#[test]
fn unknown_flags_are_usage_errors() {
    assert_eq!(tk(&["simulate-particles", "--bogus"]).status.code(), Some(2));
    assert_eq!(tk(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(tk(&["simulate-particles", "--set", "colour=red"]).status.code(), Some(2));
}

#[test]
fn deterministic_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(small_simulation(a.path()).status.code(), Some(0));
    assert_eq!(small_simulation(b.path()).status.code(), Some(0));
    for name in ["trajectory.csv", "diagnostics.csv", "events.csv"] {
        let x = fs::read(a.path().join(name)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    let header = fs::read_to_string(a.path().join("trajectory.csv")).unwrap();
    assert!(header.starts_with("t,particle,x1,x2,v1,v2\n"));
}

#[test]
fn manifest_check_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(small_simulation(dir.path()).status.code(), Some(0));
    let manifest = dir.path().join("manifest.json");
    let m = manifest.to_str().unwrap();
    assert_eq!(tk(&["verify", "--manifest", m]).status.code(), Some(0));
    let path = dir.path().join("trajectory.csv");
    let mut bytes = fs::read(&path).unwrap();
    bytes.push(b'\n');
    fs::write(&path, bytes).unwrap();
    let out = tk(&["verify", "--manifest", m]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL trajectory.csv"));
}

#[test]
fn empty_config_file_uses_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("empty.conf");
    fs::write(&conf, "").unwrap();
    let out_dir = dir.path().join("out");
    let out = tk(&[
        "pseudo-trajectory",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["d"], 2);
    assert_eq!(manifest["seed"], 1);
}

#[test]
fn badly_typed_config_value_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    fs::write(&conf, "# dimension\nd = two\n").unwrap();
    let out = tk(&["simulate-particles", "--config", conf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("line 2") && err.contains("key `d`"), "{err}");
}

#[test]
fn library_entry_point_reports_exit_codes() {
    assert_eq!(tk_cli::run_command(["tk", "--help"]), 0);
    assert_eq!(tk_cli::run_command(["tk", "measure-estimates", "--set", "d=x"]), 2);
}
