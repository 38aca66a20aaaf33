#![allow(dead_code)]

use std::path::PathBuf;
use std::process::Command;

pub const CORPUS: [&str; 9] = [
    "car",
    "cake",
    "cake_people",
    "cake_likes",
    "cake_likes_expensive_ask",
    "burning_room",
    "archives",
    "archives_learned",
    "archives_learn",
];

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn corpus(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(format!("{name}.ddtep"));
    path.to_string_lossy().into_owned()
}

pub fn ddtep(args: &[&str]) -> Run {
    ddtep_env(args, &[])
}

pub fn ddtep_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut command = Command::new(env!("CARGO_BIN_EXE_ddtep"));
    command.args(args).env_remove("DDTEP_WORLD_CAP");
    for (k, v) in env {
        command.env(k, v);
    }
    let out = command.output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

/// Runs with `--json` appended and parses the report.
pub fn report(args: &[&str]) -> serde_json::Value {
    let mut all = args.to_vec();
    all.push("--json");
    let run = ddtep(&all);
    assert_eq!(run.code, 0, "{args:?} failed: {}", run.stderr);
    serde_json::from_str(&run.stdout).expect("valid JSON")
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
