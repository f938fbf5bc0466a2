#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

pub fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn fixture(rel: &str) -> PathBuf {
    root().join("fixtures").join(rel)
}

pub fn price_fixtures() -> Vec<PathBuf> {
    ["SYNA", "SYNB", "SYNC", "OUTS"]
        .iter()
        .map(|t| fixture(&format!("prices/{t}.csv")))
        .collect()
}

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bayescrisis"))
}

pub fn run<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    bin().args(args).output().expect("binary runs")
}

pub fn fit_covid(out: &Path, extra: &[&str]) -> Output {
    let mut cmd = bin();
    cmd.arg("fit-covid")
        .arg("--cases")
        .arg(fixture("cases_wide.csv"))
        .args(["--region", "Synthland", "--seed", "42", "--out"])
        .arg(out)
        .args(extra);
    cmd.output().expect("binary runs")
}

pub fn fit_crisis(out: &Path, extra: &[&str]) -> Output {
    let mut cmd = bin();
    cmd.arg("fit-crisis")
        .arg("--prices")
        .args(price_fixtures())
        .args(["--seed", "42", "--out"])
        .arg(out)
        .args(extra);
    cmd.output().expect("binary runs")
}

pub fn read_json(path: &Path) -> Value {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text).unwrap()
}

/// Panics with every validation error when `instance` does not satisfy
/// `schemas/<name>.schema.json`.
pub fn assert_schema(name: &str, instance: &Value) {
    let schema = read_json(&root().join("schemas").join(format!("{name}.schema.json")));
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(instance).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{name}: {errors:#?}");
}

pub fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().unwrap_or_else(|| panic!("empty stderr"));
    serde_json::from_str(line).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {text}"))
}
