//! Log posteriors and curve algebra for the two regression models, plus an
//! OLS baseline.

pub mod crisis;
pub mod logistic;
pub mod ols;
pub mod priors;

use thiserror::Error;

pub use crisis::{
    crisis_log_likelihood, crisis_log_posterior, CrisisParams, CrisisPosterior, Likelihood,
    LogPosteriorParts,
};
pub use logistic::{
    daily_new_cases, logistic_log_likelihood, logistic_log_posterior, logistic_mean, LogisticData,
    LogisticParams, LogisticPosterior, CASE_SCALE,
};
pub use ols::{ols_fit, OlsFit};
pub use priors::{Prior, PriorSpec};

/// `ln(2 pi) / 2`.
pub(crate) const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("input error: {0}")]
    Input(String),
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("invalid prior: {0}")]
    Prior(String),
    #[error("singular design: column {column} ('{name}') is linearly dependent on earlier columns")]
    SingularDesign { column: usize, name: String },
}
