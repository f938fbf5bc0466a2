//! Logistic growth curve for cumulative case counts.
//!
//! Cumulative counts `n` observed at week-scaled times `t` are modelled as
//! `n ~ Normal(mu, sigma)` with `mu = alpha * 1e5 / (1 + exp(-beta (t - t0)))`.
//! The sampler works on the unconstrained vector
//! `(ln alpha, ln beta, t0, ln sigma)`; the log posterior includes the
//! log-Jacobian of that transform.

use serde::{Deserialize, Serialize};

use super::priors::{Prior, PriorSpec};
use super::{ModelError, HALF_LN_2PI};
use crate::optimize::nelder_mead;
use crate::sampler::{LogDensity, PosteriorSamples, SamplerError};

/// Fixed multiplier of `alpha`: `alpha * CASE_SCALE` is the curve's ceiling.
pub const CASE_SCALE: f64 = 1e5;

pub const PARAM_NAMES: [&str; 4] = ["alpha", "beta", "t0", "sigma"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub alpha: f64,
    /// Spread rate per week.
    pub beta: f64,
    /// Inflection time in weeks since the first observation.
    pub t0: f64,
    pub sigma: f64,
}

impl LogisticParams {
    pub fn new(alpha: f64, beta: f64, t0: f64, sigma: f64) -> Result<Self, ModelError> {
        let p = Self { alpha, beta, t0, sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let ok = self.alpha > 0.0
            && self.beta > 0.0
            && self.sigma > 0.0
            && self.t0.is_finite()
            && self.alpha.is_finite()
            && self.beta.is_finite()
            && self.sigma.is_finite();
        if ok {
            Ok(())
        } else {
            Err(ModelError::Params(format!(
                "alpha, beta and sigma must be positive and finite, t0 finite: {self:?}"
            )))
        }
    }

    pub fn from_unconstrained(raw: &[f64]) -> Self {
        Self {
            alpha: raw[0].exp(),
            beta: raw[1].exp(),
            t0: raw[2],
            sigma: raw[3].exp(),
        }
    }

    pub fn to_unconstrained(&self) -> [f64; 4] {
        [self.alpha.ln(), self.beta.ln(), self.t0, self.sigma.ln()]
    }

    /// Reads `alpha, beta, t0, sigma` from a draw laid out as
    /// [`PARAM_NAMES`].
    pub fn from_slice(v: &[f64]) -> Self {
        Self {
            alpha: v[0],
            beta: v[1],
            t0: v[2],
            sigma: v[3],
        }
    }
}

/// Logistic function, evaluated without overflow for any finite `z`.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Expected cumulative cases at week `t`.
pub fn logistic_mean(p: &LogisticParams, t: f64) -> f64 {
    p.alpha * CASE_SCALE * sigmoid(p.beta * (t - p.t0))
}

/// Time derivative of [`logistic_mean`], in cases per week.
pub fn daily_new_cases(p: &LogisticParams, t: f64) -> f64 {
    // s(z) s(-z) = e / (1 + e)^2 with e = exp(-|z|); unlike s (1 - s) this
    // keeps full precision in the tails. The exact value never exceeds 1/4,
    // so the cap only removes rounding above the maximum at z = 0.
    let e = (-(p.beta * (t - p.t0)).abs()).exp();
    let shape = (e / ((1.0 + e) * (1.0 + e))).min(0.25);
    (p.alpha * CASE_SCALE * p.beta) * shape
}

/// Observed data for the logistic model: week times and cumulative counts.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticData {
    t: Vec<f64>,
    counts: Vec<f64>,
}

impl LogisticData {
    pub fn new(t: Vec<f64>, counts: Vec<f64>) -> Result<Self, ModelError> {
        if t.len() != counts.len() {
            return Err(ModelError::Input(format!(
                "{} time points but {} counts",
                t.len(),
                counts.len()
            )));
        }
        if t.len() < 4 {
            return Err(ModelError::Input(format!(
                "need at least 4 observations, got {}",
                t.len()
            )));
        }
        if let Some(i) = counts.iter().position(|c| !(*c >= 0.0) || !c.is_finite()) {
            return Err(ModelError::Input(format!(
                "count {i} is negative or not finite: {}",
                counts[i]
            )));
        }
        if let Some(i) = t.iter().position(|x| !x.is_finite()) {
            return Err(ModelError::Input(format!("time point {i} is not finite")));
        }
        Ok(Self { t, counts })
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    /// Weakly informative, data-scaled defaults:
    /// `alpha ~ HalfNormal(2 max(n) / 1e5)`, `beta ~ HalfNormal(1)`,
    /// `t0 ~ Normal(midpoint of t, range of t)`,
    /// `sigma ~ HalfCauchy(sd of n)`.
    pub fn default_priors(&self) -> PriorSpec {
        let max_n = self.counts.iter().cloned().fold(0.0, f64::max);
        let (t_min, t_max) = self
            .t
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        let n = self.counts.len() as f64;
        let mean = self.counts.iter().sum::<f64>() / n;
        let sd = (self.counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let range = t_max - t_min;
        PriorSpec::new()
            .with("alpha", Prior::HalfNormal { scale: (2.0 * max_n / CASE_SCALE).max(1e-6) })
            .with("beta", Prior::HalfNormal { scale: 1.0 })
            .with(
                "t0",
                Prior::Normal {
                    mean: 0.5 * (t_min + t_max),
                    scale: if range > 0.0 { range } else { 1.0 },
                },
            )
            .with("sigma", Prior::HalfCauchy { scale: if sd > 0.0 { sd } else { 1.0 } })
    }
}

/// Sum of Normal log densities of the counts around the curve.
pub fn logistic_log_likelihood(p: &LogisticParams, data: &LogisticData) -> f64 {
    let ln_sigma = p.sigma.ln();
    let inv_var = 1.0 / (p.sigma * p.sigma);
    data.t
        .iter()
        .zip(&data.counts)
        .map(|(&t, &n)| {
            let r = n - logistic_mean(p, t);
            -HALF_LN_2PI - ln_sigma - 0.5 * r * r * inv_var
        })
        .sum()
}

/// Log posterior of the logistic model over the unconstrained vector.
#[derive(Debug, Clone)]
pub struct LogisticPosterior {
    data: LogisticData,
    priors: [Prior; 4],
}

impl LogisticPosterior {
    /// `priors` overrides the data-scaled defaults entry by entry.
    pub fn new(data: LogisticData, priors: &PriorSpec) -> Result<Self, ModelError> {
        let spec = data.default_priors().merged(priors);
        let resolved = spec.resolve(&PARAM_NAMES)?;
        Ok(Self {
            data,
            priors: [resolved[0], resolved[1], resolved[2], resolved[3]],
        })
    }

    pub fn data(&self) -> &LogisticData {
        &self.data
    }

    pub fn priors(&self) -> PriorSpec {
        PARAM_NAMES
            .iter()
            .zip(self.priors)
            .fold(PriorSpec::new(), |s, (n, p)| s.with(n, p))
    }

    fn log_prior_and_jacobian(&self, raw: &[f64], p: &LogisticParams) -> f64 {
        self.priors[0].log_pdf(p.alpha)
            + self.priors[1].log_pdf(p.beta)
            + self.priors[2].log_pdf(p.t0)
            + self.priors[3].log_pdf(p.sigma)
            + raw[0]
            + raw[1]
            + raw[3]
    }

    /// Least-squares grid search over `(beta, t0)` with `alpha` solved in
    /// closed form, refined by Nelder-Mead on the log posterior. Returns an
    /// unconstrained starting point for the sampler.
    pub fn initial_point(&self) -> [f64; 4] {
        let t = &self.data.t;
        let n = &self.data.counts;
        let (t_min, t_max) = t
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        let span = (t_max - t_min).max(1.0);
        let mut best = (f64::INFINITY, [0.0; 4]);
        for i in 0..=40 {
            let t0 = t_min - 0.5 * span + 2.5 * span * i as f64 / 40.0;
            for j in 0..=40 {
                let beta = (0.02f64.ln() + (10.0f64.ln() - 0.02f64.ln()) * j as f64 / 40.0).exp();
                let s: Vec<f64> = t.iter().map(|&x| sigmoid(beta * (x - t0))).collect();
                let ss: f64 = s.iter().map(|v| v * v).sum();
                if ss <= 0.0 {
                    continue;
                }
                let scale = s.iter().zip(n).map(|(a, b)| a * b).sum::<f64>() / ss;
                if scale <= 0.0 {
                    continue;
                }
                let sse: f64 = s.iter().zip(n).map(|(a, b)| (b - scale * a).powi(2)).sum();
                if sse < best.0 {
                    let sigma = (sse / n.len() as f64).sqrt().max(1e-3);
                    best = (sse, [(scale / CASE_SCALE).ln(), beta.ln(), t0, sigma.ln()]);
                }
            }
        }
        let start = best.1;
        let refined = nelder_mead(|x| -self.log_density(x), &start, &[0.1, 0.1, 0.1 * span, 0.1], 4000);
        if self.log_density(&refined).is_finite() {
            [refined[0], refined[1], refined[2], refined[3]]
        } else {
            start
        }
    }

    /// Maps unconstrained draws to `alpha, beta, t0, sigma`.
    pub fn constrain(&self, raw: &PosteriorSamples) -> Result<PosteriorSamples, SamplerError> {
        raw.map_draws(PARAM_NAMES.iter().map(|s| s.to_string()).collect(), |u| {
            let p = LogisticParams::from_unconstrained(u);
            vec![p.alpha, p.beta, p.t0, p.sigma]
        })
    }
}

impl LogDensity for LogisticPosterior {
    fn dim(&self) -> usize {
        4
    }

    fn log_density(&self, raw: &[f64]) -> f64 {
        let p = LogisticParams::from_unconstrained(raw);
        let lp = logistic_log_likelihood(&p, &self.data) + self.log_prior_and_jacobian(raw, &p);
        if lp.is_nan() {
            f64::NEG_INFINITY
        } else {
            lp
        }
    }

    fn log_density_and_gradient(&self, raw: &[f64], grad: &mut [f64]) -> f64 {
        let p = LogisticParams::from_unconstrained(raw);
        let inv_var = 1.0 / (p.sigma * p.sigma);
        let ln_sigma = raw[3];
        let mut lp = 0.0;
        let mut g = [0.0; 4];
        for (&t, &n) in self.data.t.iter().zip(&self.data.counts) {
            let z = p.beta * (t - p.t0);
            let s = sigmoid(z);
            let ds = s * sigmoid(-z);
            let mu = p.alpha * CASE_SCALE * s;
            let r = n - mu;
            lp += -HALF_LN_2PI - ln_sigma - 0.5 * r * r * inv_var;
            let dmu = r * inv_var;
            g[0] += dmu * mu;
            g[1] += dmu * p.alpha * CASE_SCALE * ds * (t - p.t0) * p.beta;
            g[2] -= dmu * p.alpha * CASE_SCALE * ds * p.beta;
            g[3] += -1.0 + r * r * inv_var;
        }
        lp += self.log_prior_and_jacobian(raw, &p);
        g[0] += self.priors[0].dlog_pdf(p.alpha) * p.alpha + 1.0;
        g[1] += self.priors[1].dlog_pdf(p.beta) * p.beta + 1.0;
        g[2] += self.priors[2].dlog_pdf(p.t0);
        g[3] += self.priors[3].dlog_pdf(p.sigma) * p.sigma + 1.0;
        grad.copy_from_slice(&g);
        if lp.is_nan() {
            f64::NEG_INFINITY
        } else {
            lp
        }
    }

    fn param_names(&self) -> Vec<String> {
        ["log_alpha", "log_beta", "t0", "log_sigma"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }
}

/// Log posterior at unconstrained `raw` for observations `(t, counts)`.
/// `priors` overrides the data-scaled defaults.
pub fn logistic_log_posterior(
    raw: &[f64],
    t: &[f64],
    counts: &[f64],
    priors: &PriorSpec,
) -> Result<f64, ModelError> {
    if raw.len() != 4 {
        return Err(ModelError::Input(format!(
            "expected 4 unconstrained parameters, got {}",
            raw.len()
        )));
    }
    let data = LogisticData::new(t.to_vec(), counts.to_vec())?;
    Ok(LogisticPosterior::new(data, priors)?.log_density(raw))
}
