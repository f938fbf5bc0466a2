//! Input parsing and feature construction.
//!
//! Case counts arrive as a wide CSV in the Johns Hopkins layout (metadata
//! columns followed by one column per date); prices as a long `date,close`
//! CSV. Both series types write back out as canonical long `date,value`
//! CSV. Loaders return recoverable data problems (revised counts, duplicate
//! dates, non-positive prices) as warnings next to the parsed value.

mod cases;
mod crisis;
mod dates;
mod prices;

use chrono::NaiveDate;
use serde::Serialize;
use thiserror::Error;

pub use cases::{load_case_csv, read_case_long_csv, write_case_long_csv};
pub use crisis::{build_crisis_design, default_crisis_windows, load_windows_csv, CrisisWindow};
pub use dates::{parse_date, to_week_axis, to_weeks};
pub use prices::{daily_returns, load_price_csv, write_price_long_csv, ReturnKind};

#[derive(Debug, Error, PartialEq)]
pub enum IngestError {
    #[error("region '{region}' not found{}", suggest(.near))]
    RegionNotFound { region: String, near: Vec<String> },
    #[error("unparseable date header '{header}' in column {column}")]
    DateHeader { column: usize, header: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("input error: {0}")]
    Input(String),
    #[error("crisis windows '{first}' and '{second}' overlap")]
    OverlappingWindows { first: String, second: String },
    #[error("csv error: {0}")]
    Csv(String),
}

fn suggest(near: &[String]) -> String {
    if near.is_empty() {
        String::new()
    } else {
        format!(" (did you mean: {}?)", near.join(", "))
    }
}

impl From<csv::Error> for IngestError {
    fn from(e: csv::Error) -> Self {
        IngestError::Csv(e.to_string())
    }
}

/// A parsed value together with the data-quality warnings raised while
/// producing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

/// Cumulative confirmed cases for one region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseSeries {
    pub region: String,
    /// First retained observation; week zero of the time axis.
    pub date0: NaiveDate,
    pub dates: Vec<NaiveDate>,
    pub cumulative: Vec<f64>,
}

impl CaseSeries {
    /// Observation times in weeks since `date0`.
    pub fn weeks(&self) -> Vec<f64> {
        to_weeks(&self.dates, self.date0)
    }
}

/// Closing prices for one ticker.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceSeries {
    pub ticker: String,
    pub dates: Vec<NaiveDate>,
    pub close: Vec<f64>,
}

/// Close-to-close returns, each dated at the later of its two prices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnSeries {
    pub ticker: String,
    pub dates: Vec<NaiveDate>,
    pub returns: Vec<f64>,
}

/// Indicator design for crisis windows, row-aligned with `dates`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrisisDesign {
    pub dates: Vec<NaiveDate>,
    pub window_names: Vec<String>,
    /// Each row is `[1, I_1, .., I_K]`: the intercept then one 0/1
    /// indicator per window.
    pub rows: Vec<Vec<f64>>,
}

impl CrisisDesign {
    pub fn column_names(&self) -> Vec<String> {
        let mut names = vec!["intercept".to_string()];
        names.extend(self.window_names.iter().cloned());
        names
    }

    /// Number of rows inside window `k`.
    pub fn window_count(&self, k: usize) -> usize {
        self.rows.iter().filter(|r| r[k + 1] == 1.0).count()
    }

    /// Indices of windows with at least one row inside them.
    pub fn identified_windows(&self) -> Vec<usize> {
        (0..self.window_names.len())
            .filter(|&k| self.window_count(k) > 0)
            .collect()
    }

    /// Copy keeping only the listed windows (intercept always kept).
    pub fn restrict(&self, windows: &[usize]) -> CrisisDesign {
        CrisisDesign {
            dates: self.dates.clone(),
            window_names: windows.iter().map(|&k| self.window_names[k].clone()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| {
                    let mut row = vec![r[0]];
                    row.extend(windows.iter().map(|&k| r[k + 1]));
                    row
                })
                .collect(),
        }
    }
}
