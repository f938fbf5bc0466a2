//! Bayesian regression toolkit for epidemic spread and crisis impact on
//! stock returns.
//!
//! The crate is organised bottom-up:
//!
//! - [`sampler`]: adaptive random-walk Metropolis and Hamiltonian Monte Carlo
//!   over arbitrary log densities, plus split R-hat and effective sample size.
//! - [`models`]: the logistic growth curve and its log posterior, the
//!   crisis-indicator return regression, and an OLS baseline.
//! - [`ingest`]: case-count and price CSV loaders, the week-scaled time axis,
//!   daily returns and the crisis indicator design.
//! - [`analytics`]: forecast bands, peak-day estimates, box statistics and
//!   ticker rankings computed from posterior draws.
//! - [`synth`]: seeded generators for synthetic fixtures.

pub mod analytics;
pub mod ingest;
pub mod models;
pub mod optimize;
pub mod rng;
pub mod sampler;
pub mod synth;

pub use analytics::{BoxStats, ForecastKind, ForecastSummary, PeakEstimate};
pub use ingest::{CaseSeries, CrisisDesign, CrisisWindow, PriceSeries, ReturnSeries};
pub use models::{CrisisParams, LogisticParams, PriorSpec};
pub use sampler::{ChainConfig, Diagnostic, DiagnosticsReport, Kernel, PosteriorSamples};
