//! End-to-end checks of the command-line interface: exit codes and
//! the validate summary.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_scalarlab"))
}

const MINIMAL_MODEL: &str = r#"
[model]
box_length = 6.283185307179586
n_max = 1
particle_cutoff = 3
mass = 1.0
coupling = 0.2
field_power = 3
"#;

#[test]
fn validate_prints_problem_sizes_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, MINIMAL_MODEL).unwrap();
    let out = bin()
        .args(["--config", path.to_str().unwrap(), "validate"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("config ok"), "stdout: {text}");
    assert!(text.contains("modes"), "stdout: {text}");
}

#[test]
fn malformed_config_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    for (name, body) in [
        ("not_toml.toml", "this is { not toml"),
        ("unknown_key.toml", &format!("{MINIMAL_MODEL}\n[model.extra]\nx = 1\n")),
        (
            "bad_range.toml",
            &MINIMAL_MODEL.replace("mass = 1.0", "mass = -1.0"),
        ),
    ] {
        let path = dir.path().join(name);
        std::fs::write(&path, body).unwrap();
        let out = bin()
            .args(["--config", path.to_str().unwrap(), "validate"])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(2), "{name}: {out:?}");
        assert!(!out.stderr.is_empty(), "{name}: expected a diagnostic");
    }
}

#[test]
fn missing_config_file_exits_with_code_two() {
    let out = bin()
        .args(["--config", "/nonexistent/run.toml", "validate"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn oversized_basis_exits_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("huge.toml");
    // 7^3 = 343 modes at cutoff 6 blows far past the dimension guard.
    let body = MINIMAL_MODEL
        .replace("n_max = 1", "n_max = 3\nspace_dim = 3")
        .replace("particle_cutoff = 3", "particle_cutoff = 6");
    std::fs::write(&path, body).unwrap();
    let out = bin()
        .args(["--config", path.to_str().unwrap(), "validate"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{out:?}");
}

#[test]
fn genfunc_demo_writes_artifacts_to_the_env_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, MINIMAL_MODEL).unwrap();
    let out_dir = dir.path().join("artifacts");
    let out = bin()
        .args(["--config", cfg.to_str().unwrap(), "genfunc-demo"])
        .env("SCALARLAB_OUT", &out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    for name in ["genfunc_pairings.csv", "genfunc_report.json", "manifest.json"] {
        assert!(out_dir.join(name).is_file(), "missing artifact {name}");
    }
}
