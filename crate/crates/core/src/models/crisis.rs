//! Crisis-indicator regression of daily returns.
//!
//! `r_t = intercept + sum_k w_k * I_k(t) + e_t`, where `I_k` is 1 inside
//! crisis window `k`, and `e_t` is Normal(0, sigma) or Student-t with `nu`
//! degrees of freedom and scale `sigma`. The unconstrained vector is
//! `(intercept, w_1..w_K, ln sigma[, ln(nu - 1)])`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};

use super::ols::{ols_fit, OlsFit};
use super::priors::{Prior, PriorSpec};
use super::{ModelError, HALF_LN_2PI};
use crate::ingest::{CrisisDesign, ReturnSeries};
use crate::sampler::{LogDensity, PosteriorSamples, SamplerError};

/// Prior key for `nu - 1` under the Student-t likelihood.
pub const NU_PRIOR_KEY: &str = "nu_minus_one";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Likelihood {
    #[default]
    Normal,
    StudentT,
}

impl std::str::FromStr for Likelihood {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "normal" => Ok(Likelihood::Normal),
            "student_t" => Ok(Likelihood::StudentT),
            other => Err(format!("unknown likelihood '{other}' (expected normal or student_t)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrisisParams {
    pub intercept: f64,
    pub weights: Vec<f64>,
    pub sigma: f64,
    /// Present only for the Student-t likelihood.
    pub nu: Option<f64>,
}

impl CrisisParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.sigma > 0.0) {
            return Err(ModelError::Params(format!("sigma must be positive, got {}", self.sigma)));
        }
        if let Some(nu) = self.nu {
            if !(nu > 1.0) {
                return Err(ModelError::Params(format!("nu must exceed 1, got {nu}")));
            }
        }
        Ok(())
    }

    pub fn to_unconstrained(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.weights.len() + 3);
        v.push(self.intercept);
        v.extend(&self.weights);
        v.push(self.sigma.ln());
        if let Some(nu) = self.nu {
            v.push((nu - 1.0).ln());
        }
        v
    }

    pub fn from_unconstrained(raw: &[f64], n_weights: usize, likelihood: Likelihood) -> Self {
        Self {
            intercept: raw[0],
            weights: raw[1..=n_weights].to_vec(),
            sigma: raw[n_weights + 1].exp(),
            nu: match likelihood {
                Likelihood::Normal => None,
                Likelihood::StudentT => Some(1.0 + raw[n_weights + 2].exp()),
            },
        }
    }
}

/// Student-t log density of residual `r` with scale `sigma`, minus the
/// `nu`-only normalising constant (added once per dataset).
fn student_t_kernel(r: f64, ln_sigma: f64, sigma: f64, nu: f64) -> f64 {
    let z = r / sigma;
    -ln_sigma - 0.5 * (nu + 1.0) * (z * z / nu).ln_1p()
}

fn student_t_constant(nu: f64) -> f64 {
    ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * std::f64::consts::PI).ln()
}

/// Log likelihood of `returns` given the linear predictor rows of `design`.
pub fn crisis_log_likelihood(
    params: &CrisisParams,
    returns: &[f64],
    rows: &[Vec<f64>],
    likelihood: Likelihood,
) -> f64 {
    let ln_sigma = params.sigma.ln();
    let mut total = 0.0;
    for (r, row) in returns.iter().zip(rows) {
        let mu = params.intercept
            + row[1..]
                .iter()
                .zip(&params.weights)
                .map(|(x, w)| x * w)
                .sum::<f64>();
        let resid = r - mu;
        total += match likelihood {
            Likelihood::Normal => {
                let z = resid / params.sigma;
                -HALF_LN_2PI - ln_sigma - 0.5 * z * z
            }
            Likelihood::StudentT => student_t_kernel(resid, ln_sigma, params.sigma, params.nu.unwrap_or(f64::INFINITY)),
        };
    }
    if let (Likelihood::StudentT, Some(nu)) = (likelihood, params.nu) {
        total += returns.len() as f64 * student_t_constant(nu);
    }
    total
}

/// Components of the crisis log posterior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPosteriorParts {
    pub likelihood: f64,
    /// Priors and Jacobian terms of intercept, weights and sigma.
    pub shared_prior: f64,
    /// Prior and Jacobian term of `nu` (zero for the Normal likelihood).
    pub nu_prior: f64,
}

impl LogPosteriorParts {
    pub fn total(&self) -> f64 {
        self.likelihood + self.shared_prior + self.nu_prior
    }
}

#[derive(Debug, Clone)]
pub struct CrisisPosterior {
    returns: Vec<f64>,
    rows: Vec<Vec<f64>>,
    weight_names: Vec<String>,
    likelihood: Likelihood,
    intercept_prior: Prior,
    weight_priors: Vec<Prior>,
    sigma_prior: Prior,
    nu_prior: Prior,
}

impl CrisisPosterior {
    /// Default priors: intercept and every weight `Normal(0, 0.05)`,
    /// `sigma ~ HalfCauchy(0.02)`, `nu - 1 ~ HalfNormal(30)`.
    pub fn default_priors(weight_names: &[String]) -> PriorSpec {
        let mut spec = PriorSpec::new()
            .with("intercept", Prior::Normal { mean: 0.0, scale: 0.05 })
            .with("sigma", Prior::HalfCauchy { scale: 0.02 })
            .with(NU_PRIOR_KEY, Prior::HalfNormal { scale: 30.0 });
        for name in weight_names {
            spec = spec.with(name, Prior::Normal { mean: 0.0, scale: 0.05 });
        }
        spec
    }

    pub fn new(
        returns: &ReturnSeries,
        design: &CrisisDesign,
        priors: &PriorSpec,
        likelihood: Likelihood,
    ) -> Result<Self, ModelError> {
        if returns.dates != design.dates {
            return Err(ModelError::Input(format!(
                "design has {} rows but the return series has {} dates (or the dates differ)",
                design.dates.len(),
                returns.dates.len()
            )));
        }
        if returns.returns.is_empty() {
            return Err(ModelError::Input("return series is empty".into()));
        }
        let weight_names = design.window_names.clone();
        let spec = Self::default_priors(&weight_names).merged(priors);
        let mut keys: Vec<&str> = vec!["intercept", "sigma", NU_PRIOR_KEY];
        keys.extend(weight_names.iter().map(String::as_str));
        let resolved = spec.resolve(&keys)?;
        Ok(Self {
            returns: returns.returns.clone(),
            rows: design.rows.clone(),
            weight_names,
            likelihood,
            intercept_prior: resolved[0],
            sigma_prior: resolved[1],
            nu_prior: resolved[2],
            weight_priors: resolved[3..].to_vec(),
        })
    }

    pub fn weight_names(&self) -> &[String] {
        &self.weight_names
    }

    pub fn likelihood(&self) -> Likelihood {
        self.likelihood
    }

    /// Constrained parameter names: intercept, one per window, sigma[, nu].
    pub fn constrained_names(&self) -> Vec<String> {
        let mut names = vec!["intercept".to_string()];
        names.extend(self.weight_names.iter().cloned());
        names.push("sigma".into());
        if self.likelihood == Likelihood::StudentT {
            names.push("nu".into());
        }
        names
    }

    pub fn parts(&self, raw: &[f64]) -> LogPosteriorParts {
        let k = self.weight_names.len();
        let p = CrisisParams::from_unconstrained(raw, k, self.likelihood);
        let likelihood = crisis_log_likelihood(&p, &self.returns, &self.rows, self.likelihood);
        let shared_prior = self.intercept_prior.log_pdf(p.intercept)
            + self
                .weight_priors
                .iter()
                .zip(&p.weights)
                .map(|(pr, w)| pr.log_pdf(*w))
                .sum::<f64>()
            + self.sigma_prior.log_pdf(p.sigma)
            + raw[k + 1];
        let nu_prior = match p.nu {
            Some(nu) => self.nu_prior.log_pdf(nu - 1.0) + raw[k + 2],
            None => 0.0,
        };
        LogPosteriorParts {
            likelihood,
            shared_prior,
            nu_prior,
        }
    }

    /// OLS on the same design; used for initialisation and as a baseline.
    pub fn ols(&self) -> Result<OlsFit, ModelError> {
        let mut names = vec!["intercept".to_string()];
        names.extend(self.weight_names.iter().cloned());
        ols_fit(&self.rows, &self.returns, Some(&names))
    }

    /// Starting point from OLS (weights, residual scale) and `nu = 10`.
    pub fn initial_point(&self) -> Result<Vec<f64>, ModelError> {
        let fit = self.ols()?;
        let dof = (self.returns.len() as f64 - fit.coefficients.len() as f64).max(1.0);
        let sigma = (fit.rss / dof).sqrt().max(1e-8);
        let mut raw = fit.coefficients.clone();
        raw.push(sigma.ln());
        if self.likelihood == Likelihood::StudentT {
            raw.push(9f64.ln());
        }
        Ok(raw)
    }

    pub fn constrain(&self, raw: &PosteriorSamples) -> Result<PosteriorSamples, SamplerError> {
        let k = self.weight_names.len();
        let lik = self.likelihood;
        raw.map_draws(self.constrained_names(), |u| {
            let p = CrisisParams::from_unconstrained(u, k, lik);
            let mut v = vec![p.intercept];
            v.extend(p.weights);
            v.push(p.sigma);
            v.extend(p.nu);
            v
        })
    }
}

impl LogDensity for CrisisPosterior {
    fn dim(&self) -> usize {
        self.weight_names.len()
            + 2
            + usize::from(self.likelihood == Likelihood::StudentT)
    }

    fn log_density(&self, raw: &[f64]) -> f64 {
        let lp = self.parts(raw).total();
        if lp.is_nan() {
            f64::NEG_INFINITY
        } else {
            lp
        }
    }

    fn log_density_and_gradient(&self, raw: &[f64], grad: &mut [f64]) -> f64 {
        let k = self.weight_names.len();
        let p = CrisisParams::from_unconstrained(raw, k, self.likelihood);
        grad.iter_mut().for_each(|g| *g = 0.0);
        let s2 = p.sigma * p.sigma;
        let mut dnu = 0.0;
        for (r, row) in self.returns.iter().zip(&self.rows) {
            let mu = p.intercept
                + row[1..]
                    .iter()
                    .zip(&p.weights)
                    .map(|(x, w)| x * w)
                    .sum::<f64>();
            let resid = r - mu;
            let (dmu, dlog_sigma) = match p.nu {
                None => (resid / s2, -1.0 + resid * resid / s2),
                Some(nu) => {
                    let z2 = resid * resid / s2;
                    dnu += -0.5 * (z2 / nu).ln_1p() + (nu + 1.0) * z2 / (2.0 * nu * (nu + z2));
                    (
                        (nu + 1.0) * resid / (nu * s2 + resid * resid),
                        -1.0 + (nu + 1.0) * z2 / (nu + z2),
                    )
                }
            };
            grad[0] += dmu;
            for j in 0..k {
                grad[j + 1] += dmu * row[j + 1];
            }
            grad[k + 1] += dlog_sigma;
        }
        grad[0] += self.intercept_prior.dlog_pdf(p.intercept);
        for j in 0..k {
            grad[j + 1] += self.weight_priors[j].dlog_pdf(p.weights[j]);
        }
        grad[k + 1] += self.sigma_prior.dlog_pdf(p.sigma) * p.sigma + 1.0;
        if let Some(nu) = p.nu {
            let n = self.returns.len() as f64;
            dnu += n * (0.5 * digamma(0.5 * (nu + 1.0)) - 0.5 * digamma(0.5 * nu) - 0.5 / nu);
            let m = nu - 1.0;
            grad[k + 2] = dnu * m + self.nu_prior.dlog_pdf(m) * m + 1.0;
        }
        self.log_density(raw)
    }

    fn param_names(&self) -> Vec<String> {
        let mut names = vec!["intercept".to_string()];
        names.extend(self.weight_names.iter().cloned());
        names.push("log_sigma".into());
        if self.likelihood == Likelihood::StudentT {
            names.push("log_nu_minus_one".into());
        }
        names
    }
}

/// Log posterior at unconstrained `raw`.
pub fn crisis_log_posterior(
    raw: &[f64],
    returns: &ReturnSeries,
    design: &CrisisDesign,
    priors: &PriorSpec,
    likelihood: Likelihood,
) -> Result<f64, ModelError> {
    let post = CrisisPosterior::new(returns, design, priors, likelihood)?;
    if raw.len() != post.dim() {
        return Err(ModelError::Input(format!(
            "expected {} unconstrained parameters, got {}",
            post.dim(),
            raw.len()
        )));
    }
    Ok(post.log_density(raw))
}
