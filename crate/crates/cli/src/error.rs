use std::path::Path;

use bayescrisis::analytics::AnalyticsError;
use bayescrisis::ingest::IngestError;
use bayescrisis::models::ModelError;
use bayescrisis::sampler::SamplerError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Ingest(#[from] IngestError),
    #[error("{0}")]
    Model(#[from] ModelError),
    #[error("{0}")]
    Sampler(#[from] SamplerError),
    #[error("{0}")]
    Analytics(#[from] AnalyticsError),
    #[error("{0}")]
    Mismatch(String),
}

impl CliError {
    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    /// Stable machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Ingest(_) => "input",
            CliError::Model(_) => "model",
            CliError::Sampler(_) => "sampler",
            CliError::Analytics(_) => "analytics",
            CliError::Mismatch(_) => "mismatch",
        }
    }

    /// One-line JSON object for the error stream.
    pub fn to_json_line(&self) -> String {
        serde_json::json!({ "error": self.kind(), "message": self.to_string() }).to_string()
    }
}
