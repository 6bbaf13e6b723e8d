//! End-to-end tests of the command-line binary: flags, config loading,
//! output formats, file output, and error reporting.

use std::process::Command;

const SMALL_CONFIG: &str = r#"
[fluid]
horizon = 2.0

[simulate]
n = 100
horizon = 2.0

[fwlln]
ns = [100]
horizon = 2.0
reps = 2

[ap]
n = 200
t_check = 1.0
reps = 50

[ssc]
ns = [100]
horizon = 2.0
reps = 2

[steady]
n = 100
horizon = 8.0
reps = 2

[expand]
n = 200
s_values = [1.0]
reps = 50
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_xmodel"))
}

fn config_file() -> tempfile::NamedTempFile {
    use std::io::Write;
    let mut f = tempfile::NamedTempFile::new().expect("temp file");
    f.write_all(SMALL_CONFIG.as_bytes()).expect("write config");
    f
}

#[test]
fn every_subcommand_runs_in_both_formats() {
    let cfg = config_file();
    let subs = [
        "fluid",
        "stationary",
        "ftsp-pi",
        "simulate",
        "fwlln",
        "ap",
        "ssc",
        "steady",
        "expand",
    ];
    for sub in subs {
        for format in ["csv", "json"] {
            let out = bin()
                .args([
                    sub,
                    "--config",
                    cfg.path().to_str().unwrap(),
                    "--seed",
                    "3",
                    "--format",
                    format,
                ])
                .output()
                .expect("spawn");
            assert!(
                out.status.success(),
                "{sub} --format {format} failed: {}",
                String::from_utf8_lossy(&out.stderr)
            );
            let text = String::from_utf8(out.stdout).expect("utf8");
            assert!(!text.trim().is_empty(), "{sub} produced no output");
            if format == "json" {
                serde_json::from_str::<serde_json::Value>(&text)
                    .unwrap_or_else(|e| panic!("{sub} emitted invalid json: {e}"));
            }
        }
    }
}

#[test]
fn stationary_defaults_need_no_config() {
    let out = bin().arg("stationary").output().expect("spawn");
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("0.222222222222"), "missing z12*: {text}");
    assert!(text.contains("0.186046511628"), "missing pi*: {text}");
}

#[test]
fn out_flag_writes_file_instead_of_stdout() {
    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("report.csv");
    let out = bin()
        .args(["stationary", "--out", path.to_str().unwrap()])
        .output()
        .expect("spawn");
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).expect("report file");
    assert!(text.contains("0.222222222222"));
}

#[test]
fn same_seed_means_identical_output() {
    let cfg = config_file();
    let run = || {
        let out = bin()
            .args([
                "simulate",
                "--config",
                cfg.path().to_str().unwrap(),
                "--seed",
                "9",
            ])
            .output()
            .expect("spawn");
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run(), run());
}

#[test]
fn different_seed_changes_simulation_output() {
    let cfg = config_file();
    let run = |seed: &str| {
        let out = bin()
            .args([
                "simulate",
                "--config",
                cfg.path().to_str().unwrap(),
                "--seed",
                seed,
            ])
            .output()
            .expect("spawn");
        assert!(out.status.success());
        out.stdout
    };
    assert_ne!(run("9"), run("10"));
}

#[test]
fn unknown_config_key_is_reported_by_name() {
    use std::io::Write;
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(b"[fluid]\nhorzion = 2.0\n").unwrap();
    let out = bin()
        .args(["fluid", "--config", f.path().to_str().unwrap()])
        .output()
        .expect("spawn");
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("horzion"), "stderr should name the bad key: {err}");
}

#[test]
fn missing_config_file_fails_with_path_in_message() {
    let out = bin()
        .args(["fluid", "--config", "/nonexistent/xmodel.toml"])
        .output()
        .expect("spawn");
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("/nonexistent/xmodel.toml"), "stderr: {err}");
}
