use std::path::PathBuf;

use bayescrisis::analytics::ForecastKind;
use bayescrisis::ingest::ReturnKind;
use bayescrisis::models::Likelihood;
use bayescrisis::Kernel;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "bayescrisis", version, about = "Bayesian epidemic-curve and crisis-impact fits with MCMC")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the logistic growth curve to one region's cumulative cases.
    FitCovid(FitCovidArgs),
    /// Fit crisis-indicator regressions to one or more tickers.
    FitCrisis(FitCrisisArgs),
    /// Recompute R-hat and ESS from a draw CSV and check a stored report.
    Diagnostics(DiagnosticsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

/// Flags shared by the fit commands. Every field is optional so that a
/// config file can fill it in; flags win over the file.
#[derive(Debug, Clone, Default, Args)]
pub struct SharedArgs {
    /// Seed for every random stream (required here or in the config file).
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub chains: Option<usize>,
    #[arg(long)]
    pub warmup: Option<usize>,
    #[arg(long)]
    pub draws: Option<usize>,
    #[arg(long, value_parser = parse_from_str::<Kernel>)]
    pub kernel: Option<Kernel>,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated subset of json,csv,svg.
    #[arg(long, value_delimiter = ',')]
    pub format: Option<Vec<Format>>,
    /// TOML file with defaults for any of these flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FitCovidArgs {
    #[command(flatten)]
    pub shared: SharedArgs,
    /// Wide case CSV (JHU time-series layout).
    #[arg(long)]
    pub cases: Option<PathBuf>,
    #[arg(long)]
    pub region: Option<String>,
    /// Days past the last observation to forecast.
    #[arg(long)]
    pub horizon_days: Option<u32>,
    #[arg(long, value_parser = parse_from_str::<ForecastKind>)]
    pub band: Option<ForecastKind>,
}

#[derive(Debug, Clone, Args)]
pub struct FitCrisisArgs {
    #[command(flatten)]
    pub shared: SharedArgs,
    /// One price CSV per ticker; the ticker is the file stem.
    #[arg(long, num_args = 1..)]
    pub prices: Vec<PathBuf>,
    /// Crisis windows CSV (name,start,end); defaults to the built-in three.
    #[arg(long)]
    pub windows: Option<PathBuf>,
    #[arg(long, value_parser = parse_from_str::<Likelihood>)]
    pub likelihood: Option<Likelihood>,
    #[arg(long, value_parser = parse_from_str::<ReturnKind>)]
    pub returns: Option<ReturnKind>,
    #[arg(long)]
    pub top_k: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct DiagnosticsArgs {
    /// Draw CSV written by a fit command.
    #[arg(long)]
    pub draws: PathBuf,
    /// Stored diagnostics JSON to verify against; defaults to
    /// diagnostics.json next to the draw file when present.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Also write the recomputed report to <out>/diagnostics.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_from_str<T: std::str::FromStr<Err = String>>(s: &str) -> Result<T, String> {
    s.parse()
}
