//! End-to-end checks of the `mpbo` binary: exit codes, output formats,
//! environment overrides, and byte-identical reruns.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mpbo"))
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mpbo-cli-test-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, out_dir: &Path) -> PathBuf {
    let path = dir.join("config.json");
    let config = serde_json::json!({
        "testbed": "landscape",
        "gap": "kinematic",
        "gap_magnitude": 0.5,
        "policies": 3,
        "budget": 12,
        "n_init": 2,
        "algorithms": ["mpbo", "equal_split", "round_robin", "random_search"],
        "seeds": [0, 1, 2],
        "output_dir": out_dir.to_str().unwrap(),
    });
    std::fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("process terminated by signal")
}

#[test]
fn run_then_verify_round_trips() {
    let dir = tmp_dir("roundtrip");
    let out = dir.join("out");
    let config = write_config(&dir, &out);

    let run = bin().arg("run").arg(&config).output().unwrap();
    assert_eq!(code(&run), 0, "stderr: {}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("mpbo"), "summary table missing: {stdout}");
    assert!(out.join("records.jsonl").exists());
    assert!(out.join("summary.csv").exists());

    let verify = bin().arg("verify").arg(&out).output().unwrap();
    assert_eq!(code(&verify), 0, "stderr: {}", String::from_utf8_lossy(&verify.stderr));
}

#[test]
fn rerun_is_byte_identical() {
    let dir = tmp_dir("determinism");
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    let config = write_config(&dir, &out_a);

    let first = bin().arg("run").arg(&config).output().unwrap();
    assert_eq!(code(&first), 0);
    // Same config, different output directory via the env override.
    let second = bin()
        .arg("run")
        .arg(&config)
        .env("MPBO_OUT", &out_b)
        .output()
        .unwrap();
    assert_eq!(code(&second), 0);

    let records_a = std::fs::read(out_a.join("records.jsonl")).unwrap();
    let records_b = std::fs::read(out_b.join("records.jsonl")).unwrap();
    assert_eq!(records_a, records_b, "record files differ between reruns");
    let summary_a = std::fs::read(out_a.join("summary.csv")).unwrap();
    let summary_b = std::fs::read(out_b.join("summary.csv")).unwrap();
    assert_eq!(summary_a, summary_b);
}

#[test]
fn invalid_config_exits_2() {
    let dir = tmp_dir("badconfig");
    let path = dir.join("config.json");
    std::fs::write(&path, r#"{"testbed": "landscape", "unknown_key": 1}"#).unwrap();
    let output = bin().arg("run").arg(&path).output().unwrap();
    assert_eq!(code(&output), 2);
}

#[test]
fn missing_config_file_exits_3() {
    let output = bin().arg("run").arg("/nonexistent/config.json").output().unwrap();
    assert_eq!(code(&output), 3);
}

#[test]
fn usage_error_exits_2() {
    let output = bin().arg("frobnicate").output().unwrap();
    assert_eq!(code(&output), 2);
    assert!(String::from_utf8_lossy(&output.stderr).contains("usage"));
}

#[test]
fn tampered_records_fail_verification_with_exit_1() {
    let dir = tmp_dir("tamper");
    let out = dir.join("out");
    let config = write_config(&dir, &out);
    assert_eq!(code(&bin().arg("run").arg(&config).output().unwrap()), 0);

    let records_path = out.join("records.jsonl");
    let text = std::fs::read_to_string(&records_path).unwrap();
    let tampered = text.replacen("\"best_reward\":", "\"best_reward\":9e9, \"_x\":", 1);
    assert_ne!(text, tampered);
    std::fs::write(&records_path, tampered).unwrap();

    let verify = bin().arg("verify").arg(&out).output().unwrap();
    assert_eq!(code(&verify), 1);
}

#[test]
fn dump_landscape_writes_csv() {
    let dir = tmp_dir("dump");
    let out = dir.join("out");
    let config = write_config(&dir, &out);
    let output = bin()
        .arg("dump-landscape")
        .arg(&config)
        .args(["--policy", "1", "--resolution", "9"])
        .output()
        .unwrap();
    assert_eq!(code(&output), 0, "stderr: {}", String::from_utf8_lossy(&output.stderr));

    let path = out.join("landscape_policy1_res9.csv");
    assert!(path.exists());
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,y,reward"));
    assert_eq!(lines.count(), 81);
}

#[test]
fn one_seed_one_algorithm_writes_one_record() {
    let dir = tmp_dir("onecell");
    let out = dir.join("out");
    let path = dir.join("config.json");
    let config = serde_json::json!({
        "testbed": "landscape",
        "gap": "none",
        "policies": 2,
        "budget": 6,
        "algorithms": ["mpbo"],
        "seeds": [5],
        "output_dir": out.to_str().unwrap(),
    });
    std::fs::write(&path, serde_json::to_string(&config).unwrap()).unwrap();
    assert_eq!(code(&bin().arg("run").arg(&path).output().unwrap()), 0);
    let records = std::fs::read_to_string(out.join("records.jsonl")).unwrap();
    assert_eq!(records.lines().count(), 1);
}

#[test]
fn dump_landscape_bad_policy_exits_2() {
    let dir = tmp_dir("dumpbad");
    let out = dir.join("out");
    let config = write_config(&dir, &out);
    let output = bin()
        .arg("dump-landscape")
        .arg(&config)
        .args(["--policy", "7", "--resolution", "9"])
        .output()
        .unwrap();
    assert_eq!(code(&output), 2);
}
