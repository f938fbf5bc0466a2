//! Convergence diagnostics: split R-hat and effective sample size.

use serde::{Serialize, Serializer};

use super::{PosteriorSamples, SamplerError};

/// A diagnostic value, or a flag when the chains carry no variance and the
/// statistic is undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Diagnostic {
    Value(f64),
    DegenerateConstant,
}

impl Diagnostic {
    pub fn value(self) -> Option<f64> {
        match self {
            Diagnostic::Value(v) => Some(v),
            Diagnostic::DegenerateConstant => None,
        }
    }

    pub fn is_degenerate(self) -> bool {
        matches!(self, Diagnostic::DegenerateConstant)
    }
}

/// Serialises as a number, or as the string `"degenerate_constant"`.
impl Serialize for Diagnostic {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Diagnostic::Value(v) => s.serialize_f64(*v),
            Diagnostic::DegenerateConstant => s.serialize_str("degenerate_constant"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamDiagnostics {
    pub name: String,
    pub rhat: Diagnostic,
    pub ess: Diagnostic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub n_chains: usize,
    pub n_draws: usize,
    pub params: Vec<ParamDiagnostics>,
    /// Post-warmup acceptance rate per chain; empty for samples read from a
    /// file.
    pub acceptance: Vec<f64>,
}

impl DiagnosticsReport {
    /// Largest defined R-hat across parameters.
    pub fn max_rhat(&self) -> Option<f64> {
        self.params
            .iter()
            .filter_map(|p| p.rhat.value())
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
    }
}

pub fn diagnose(samples: &PosteriorSamples) -> Result<DiagnosticsReport, SamplerError> {
    let rhat = split_rhat(samples)?;
    let ess = effective_sample_size(samples)?;
    let params = samples
        .param_names()
        .iter()
        .zip(rhat.into_iter().zip(ess))
        .map(|(name, (rhat, ess))| ParamDiagnostics {
            name: name.clone(),
            rhat,
            ess,
        })
        .collect();
    Ok(DiagnosticsReport {
        n_chains: samples.n_chains(),
        n_draws: samples.n_draws(),
        params,
        acceptance: samples.acceptance.clone(),
    })
}

/// Split R-hat per parameter.
pub fn split_rhat(samples: &PosteriorSamples) -> Result<Vec<Diagnostic>, SamplerError> {
    check_len(samples.n_draws())?;
    Ok((0..samples.dim())
        .map(|p| split_rhat_chains(&samples.traces(p)))
        .collect())
}

/// Effective sample size per parameter.
pub fn effective_sample_size(samples: &PosteriorSamples) -> Result<Vec<Diagnostic>, SamplerError> {
    check_len(samples.n_draws())?;
    Ok((0..samples.dim())
        .map(|p| effective_sample_size_chains(&samples.traces(p)))
        .collect())
}

fn check_len(n: usize) -> Result<(), SamplerError> {
    if n < 4 {
        Err(SamplerError::TooFewDraws(n))
    } else {
        Ok(())
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

fn is_constant(xs: &[f64]) -> bool {
    xs.iter().all(|&x| x == xs[0])
}

/// Split R-hat over equal-length chains of one parameter.
///
/// Each chain is cut into two halves (the middle draw is dropped when the
/// length is odd) and the classic potential scale reduction is computed over
/// the `2m` half-chains. The result is floored at 1. When every half-chain is
/// constant the within-chain variance is zero and the statistic is undefined.
pub fn split_rhat_chains(chains: &[Vec<f64>]) -> Diagnostic {
    let n = chains.iter().map(Vec::len).min().unwrap_or(0);
    let half = n / 2;
    if half < 2 {
        return Diagnostic::DegenerateConstant;
    }
    let mut halves: Vec<&[f64]> = Vec::with_capacity(2 * chains.len());
    for c in chains {
        halves.push(&c[..half]);
        halves.push(&c[n - half..n]);
    }
    if halves.iter().all(|h| is_constant(h)) {
        return Diagnostic::DegenerateConstant;
    }
    let means: Vec<f64> = halves.iter().map(|h| mean(h)).collect();
    let within = mean(&halves.iter().map(|h| sample_variance(h)).collect::<Vec<_>>());
    let len = half as f64;
    let between = len * sample_variance(&means);
    let var_plus = (len - 1.0) / len * within + between / len;
    Diagnostic::Value((var_plus / within).sqrt().max(1.0))
}

/// Autocovariance of a mean-centred series at `lag`, normalised by `n`
/// (the biased estimator used by the Geyer truncation rule).
fn autocovariance(centered: &[f64], lag: usize) -> f64 {
    let n = centered.len();
    centered[..n - lag]
        .iter()
        .zip(&centered[lag..])
        .map(|(a, b)| a * b)
        .sum::<f64>()
        / n as f64
}

/// Effective sample size of one parameter pooled over equal-length chains.
///
/// Autocorrelations are combined across chains as
/// `rho_k = 1 - (W - mean_c acov_c(k)) / var_plus`, summed over Geyer's
/// initial positive sequence of lag pairs made monotone, and the result is
/// clamped to `(0, chains * draws]`.
pub fn effective_sample_size_chains(chains: &[Vec<f64>]) -> Diagnostic {
    let m = chains.len();
    let n = chains.iter().map(Vec::len).min().unwrap_or(0);
    if m == 0 || n < 4 {
        return Diagnostic::DegenerateConstant;
    }
    let chains: Vec<&[f64]> = chains.iter().map(|c| &c[..n]).collect();
    if chains.iter().all(|c| is_constant(c)) {
        return Diagnostic::DegenerateConstant;
    }
    let total = (m * n) as f64;
    let nf = n as f64;

    let chain_means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let centered: Vec<Vec<f64>> = chains
        .iter()
        .zip(&chain_means)
        .map(|(c, mu)| c.iter().map(|x| x - mu).collect())
        .collect();
    let within = centered
        .iter()
        .map(|c| autocovariance(c, 0) * nf / (nf - 1.0))
        .sum::<f64>()
        / m as f64;
    let mut var_plus = within * (nf - 1.0) / nf;
    if m > 1 {
        var_plus += sample_variance(&chain_means);
    }
    let rho = |lag: usize| -> f64 {
        let mean_acov = centered.iter().map(|c| autocovariance(c, lag)).sum::<f64>() / m as f64;
        1.0 - (within - mean_acov) / var_plus
    };

    // Pair sums Gamma_k = rho_{2k} + rho_{2k+1}; Gamma_0 always counts, later
    // pairs until the first non-positive one, each capped by its predecessor.
    let mut tau_sum = 1.0 + rho(1);
    let mut prev = tau_sum;
    let mut k = 1;
    while 2 * k + 1 < n {
        let gamma = rho(2 * k) + rho(2 * k + 1);
        if gamma <= 0.0 {
            break;
        }
        let gamma = gamma.min(prev);
        tau_sum += gamma;
        prev = gamma;
        k += 1;
    }
    let tau = -1.0 + 2.0 * tau_sum;
    let ess = if tau > 1.0 / total { total / tau } else { total };
    Diagnostic::Value(ess.min(total))
}
