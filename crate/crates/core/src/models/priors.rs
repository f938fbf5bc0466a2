use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use super::{ModelError, HALF_LN_2PI};

/// A univariate prior in the parameter's native units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Prior {
    HalfNormal { scale: f64 },
    Normal { mean: f64, scale: f64 },
    HalfCauchy { scale: f64 },
}

impl Prior {
    pub fn scale(&self) -> f64 {
        match *self {
            Prior::HalfNormal { scale } | Prior::Normal { scale, .. } | Prior::HalfCauchy { scale } => scale,
        }
    }

    pub fn validate(&self, name: &str) -> Result<(), ModelError> {
        let s = self.scale();
        let mean_ok = match *self {
            Prior::Normal { mean, .. } => mean.is_finite(),
            _ => true,
        };
        if s > 0.0 && s.is_finite() && mean_ok {
            Ok(())
        } else {
            Err(ModelError::Prior(format!(
                "prior for '{name}' needs a positive finite scale, got {self:?}"
            )))
        }
    }

    /// Normalised log density. Half distributions are supported on `x >= 0`.
    pub fn log_pdf(&self, x: f64) -> f64 {
        match *self {
            Prior::Normal { mean, scale } => {
                let z = (x - mean) / scale;
                -HALF_LN_2PI - scale.ln() - 0.5 * z * z
            }
            Prior::HalfNormal { scale } => {
                if x < 0.0 {
                    return f64::NEG_INFINITY;
                }
                let z = x / scale;
                LN_2 - HALF_LN_2PI - scale.ln() - 0.5 * z * z
            }
            Prior::HalfCauchy { scale } => {
                if x < 0.0 {
                    return f64::NEG_INFINITY;
                }
                let z = x / scale;
                LN_2 - (PI * scale).ln() - z.ln_1p_square()
            }
        }
    }

    /// Derivative of [`Prior::log_pdf`] with respect to `x`.
    pub fn dlog_pdf(&self, x: f64) -> f64 {
        match *self {
            Prior::Normal { mean, scale } => -(x - mean) / (scale * scale),
            Prior::HalfNormal { scale } => -x / (scale * scale),
            Prior::HalfCauchy { scale } => -2.0 * x / (scale * scale + x * x),
        }
    }
}

trait Ln1pSquare {
    fn ln_1p_square(self) -> f64;
}

impl Ln1pSquare for f64 {
    /// `ln(1 + x^2)` without overflow for large `x`.
    fn ln_1p_square(self) -> f64 {
        let a = self.abs();
        if a > 1e150 {
            2.0 * a.ln()
        } else {
            (a * a).ln_1p()
        }
    }
}

/// Priors keyed by parameter name. Models fill in their defaults and apply
/// any entries present here on top.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    #[serde(flatten)]
    pub priors: BTreeMap<String, Prior>,
}

impl PriorSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, prior: Prior) -> Self {
        self.priors.insert(name.to_string(), prior);
        self
    }

    pub fn get(&self, name: &str) -> Option<&Prior> {
        self.priors.get(name)
    }

    /// `self` with every entry of `overrides` replacing the matching one.
    pub fn merged(&self, overrides: &PriorSpec) -> PriorSpec {
        let mut out = self.clone();
        out.priors
            .extend(overrides.priors.iter().map(|(k, v)| (k.clone(), *v)));
        out
    }

    pub(crate) fn resolve(&self, names: &[&str]) -> Result<Vec<Prior>, ModelError> {
        names
            .iter()
            .map(|n| {
                let p = self
                    .get(n)
                    .ok_or_else(|| ModelError::Prior(format!("no prior given for '{n}'")))?;
                p.validate(n)?;
                Ok(*p)
            })
            .collect()
    }
}
