//! End-to-end checks of the binary: exit codes, artifact files, and the
//! config override path.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sigmin"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sigmin-cli-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, body).unwrap();
    path
}

const SMALL: &str = r#"
[ensemble]
kind = "iid"
rows = 12
cols = 12
law = { kind = "gaussian" }

[experiment]
trials = 40
epsilon = [0.0, 0.2, 0.8]
seed = 11
"#;

#[test]
fn sigma_tail_writes_artifacts_and_passes() {
    let dir = scratch("sigma");
    let config = write_config(&dir, SMALL);
    let out = bin()
        .args(["--config", config.to_str().unwrap()])
        .args(["--out-dir", dir.to_str().unwrap()])
        .args(["--plot", "sigma-tail"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("sigma_tail.csv")).unwrap();
    assert!(csv.starts_with("epsilon,hits,trials,p_hat,stderr,curve"));
    assert_eq!(csv.lines().count(), 4);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("sigma_tail.json")).unwrap())
            .unwrap();
    assert_eq!(json["results"]["trials"], 40);
    assert_eq!(json["config"]["experiment"]["seed"], 11);
    assert!(dir.join("sigma_tail.svg").exists());
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn replotting_a_stored_csv_round_trips() {
    let dir = scratch("replot");
    let config = write_config(&dir, SMALL);
    let run = bin()
        .args(["--config", config.to_str().unwrap()])
        .args(["--out-dir", dir.to_str().unwrap()])
        .arg("sigma-tail")
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(0));
    let csv = dir.join("sigma_tail.csv");
    let replot = bin()
        .args(["report", "plot", "--input", csv.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(replot.status.code(), Some(0));
    let svg = std::fs::read_to_string(dir.join("sigma_tail.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn rlcd_eval_reads_vector_files() {
    let dir = scratch("rlcd");
    let config = write_config(
        &dir,
        r#"
[ensemble]
kind = "iid"
rows = 1
cols = 1
law = { kind = "signed-bernoulli", p = 0.5 }

[rlcd]
gamma = 10.0
u = 0.125
grid_points = 4000
"#,
    );
    let vector = dir.join("v.txt");
    std::fs::write(&vector, "1.0\n").unwrap();
    let out = bin()
        .args(["--config", config.to_str().unwrap()])
        .args(["--out-dir", dir.to_str().unwrap()])
        .args(["rlcd", "eval", "--vector", vector.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    // 1-D signed Bernoulli closed form 1/(2 + sqrt(2u)) = 0.4.
    assert!(stdout.contains("rlcd: 0.4000"), "stdout: {stdout}");
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn violations_and_config_errors_use_distinct_exit_codes() {
    let dir = scratch("codes");
    // Impossible fraction bound forces exit 1 on an otherwise clean run.
    let config = write_config(
        &dir,
        r#"
[ensemble]
kind = "iid"
rows = 4
cols = 4
law = { kind = "signed-bernoulli" }

[rlcd]
gamma = 0.03
u = 0.05
grid_points = 500
grid_span = 1e4

[experiment]
samples = 3
seed = 3
"#,
    );
    let violation = bin()
        .args(["--config", config.to_str().unwrap()])
        .args(["--out-dir", dir.to_str().unwrap()])
        .args(["lattice", "unstructured", "--max-fraction=-1.0"])
        .output()
        .unwrap();
    assert_eq!(
        violation.status.code(),
        Some(1),
        "stderr: {}",
        String::from_utf8_lossy(&violation.stderr)
    );

    let broken = write_config(&dir, "[ensemble\n");
    let parse = bin()
        .args(["--config", broken.to_str().unwrap()])
        .arg("sigma-tail")
        .output()
        .unwrap();
    assert_eq!(parse.status.code(), Some(2));

    let missing = bin()
        .args(["rlcd", "eval", "--vector", "/nonexistent/v.txt"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
    std::fs::remove_dir_all(dir).ok();
}
