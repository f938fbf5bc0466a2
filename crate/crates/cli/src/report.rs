//! Artifact writers. JSON is pretty-printed with a trailing newline; floats
//! use the shortest representation that reads back to the same value.

use std::fs;
use std::path::{Path, PathBuf};

use bayescrisis::{DiagnosticsReport, PosteriorSamples};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;

/// R-hat above this marks a run as not converged (exit status 2).
pub const RHAT_THRESHOLD: f64 = 1.05;

pub struct OutDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn target(&mut self, rel: &str) -> Result<PathBuf, CliError> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        self.written.push(rel.to_string());
        Ok(path)
    }

    pub fn bytes(&mut self, rel: &str, data: &[u8]) -> Result<(), CliError> {
        let path = self.target(rel)?;
        fs::write(&path, data).map_err(|e| CliError::io(&path, e))
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, rel: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("artifact serialises");
        text.push('\n');
        self.bytes(rel, text.as_bytes())
    }

    pub fn draws(&mut self, rel: &str, samples: &PosteriorSamples) -> Result<(), CliError> {
        let mut buf = Vec::new();
        samples
            .write_csv(&mut buf)
            .map_err(|e| CliError::io(&self.root.join(rel), e))?;
        self.bytes(rel, &buf)
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }
}

/// Diagnostics JSON: the report plus the convergence verdict.
pub fn diagnostics_json(report: &DiagnosticsReport, warnings: &[String]) -> Value {
    let mut v = serde_json::to_value(report).expect("report serialises");
    let max = report.max_rhat();
    v["max_rhat"] = json!(max);
    v["rhat_threshold"] = json!(RHAT_THRESHOLD);
    v["converged"] = json!(max.is_none_or(|r| r <= RHAT_THRESHOLD));
    v["warnings"] = json!(warnings);
    v
}

pub fn converged(report: &DiagnosticsReport) -> bool {
    report.max_rhat().is_none_or(|r| r <= RHAT_THRESHOLD)
}
