//! Hamiltonian Monte Carlo with a fixed number of leapfrog steps.
//!
//! Warmup follows the usual three-phase layout: a fast phase that only tunes
//! the step size, a slow phase that additionally estimates a diagonal mass
//! matrix from the draws, and a final fast phase that re-tunes the step size
//! for the new metric. Step size tuning is Nesterov dual averaging.

use rand::Rng;
use rand_distr::StandardNormal;

use super::metropolis::acceptance_probability;
use super::{ChainConfig, ChainRun, LogDensity, ADAPT_WINDOW};
use crate::rng::ChaCha8Rng;

/// Below this many warmup iterations the mass matrix stays at identity.
const MIN_WARMUP_FOR_METRIC: usize = 150;

#[derive(Debug, Clone)]
pub(crate) struct DualAverage {
    log_step: f64,
    log_step_avg: f64,
    hbar: f64,
    mu: f64,
    count: u64,
}

impl DualAverage {
    const KAPPA: f64 = 0.75;
    const T0: f64 = 10.0;
    const GAMMA: f64 = 0.05;

    pub(crate) fn new(initial_step: f64) -> Self {
        Self {
            log_step: initial_step.ln(),
            log_step_avg: initial_step.ln(),
            hbar: 0.0,
            mu: (10.0 * initial_step).ln(),
            count: 1,
        }
    }

    pub(crate) fn advance(&mut self, accept_stat: f64, target: f64) {
        let n = self.count as f64;
        let w = 1.0 / (n + Self::T0);
        self.hbar = (1.0 - w) * self.hbar + w * (target - accept_stat);
        self.log_step = self.mu - self.hbar * n.sqrt() / Self::GAMMA;
        let mk = n.powf(-Self::KAPPA);
        self.log_step_avg = mk * self.log_step + (1.0 - mk) * self.log_step_avg;
        self.count += 1;
    }

    pub(crate) fn step(&self) -> f64 {
        self.log_step.exp()
    }

    pub(crate) fn adapted_step(&self) -> f64 {
        self.log_step_avg.exp()
    }
}

struct Leapfrog<'a, D: ?Sized> {
    target: &'a D,
    inv_mass: Vec<f64>,
    steps: usize,
}

impl<D: LogDensity + ?Sized> Leapfrog<'_, D> {
    /// Integrates from `(x, p)` in place and returns the final log density,
    /// or `None` if the trajectory left the support.
    fn integrate(&self, x: &mut [f64], p: &mut [f64], grad: &mut [f64], step: f64) -> Option<f64> {
        let mut lp = f64::NAN;
        for (pi, gi) in p.iter_mut().zip(grad.iter()) {
            *pi += 0.5 * step * gi;
        }
        for s in 0..self.steps {
            for i in 0..x.len() {
                x[i] += step * self.inv_mass[i] * p[i];
            }
            lp = self.target.log_density_and_gradient(x, grad);
            if !lp.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return None;
            }
            let scale = if s + 1 == self.steps { 0.5 } else { 1.0 };
            for (pi, gi) in p.iter_mut().zip(grad.iter()) {
                *pi += scale * step * gi;
            }
        }
        Some(lp)
    }

    fn kinetic(&self, p: &[f64]) -> f64 {
        0.5 * p
            .iter()
            .zip(&self.inv_mass)
            .map(|(pi, m)| pi * pi * m)
            .sum::<f64>()
    }
}

pub(crate) fn run_chain<D: LogDensity + ?Sized>(
    target: &D,
    init: &[f64],
    config: &ChainConfig,
    rng: &mut ChaCha8Rng,
) -> ChainRun {
    let dim = init.len();
    let target_accept = config.target_accept_for(dim);
    let n_warmup = config.n_warmup;

    let (slow_start, slow_end) = if n_warmup >= MIN_WARMUP_FOR_METRIC {
        (n_warmup * 15 / 100, n_warmup * 90 / 100)
    } else {
        (n_warmup, n_warmup)
    };

    let mut lf = Leapfrog {
        target,
        inv_mass: vec![1.0; dim],
        steps: config.hmc_leapfrog_steps,
    };
    let mut dual = DualAverage::new(config.initial_step_size);
    let mut step = config.initial_step_size;

    let mut x = init.to_vec();
    let mut grad = vec![0.0; dim];
    let mut lp = target.log_density_and_gradient(&x, &mut grad);

    let mut x_new = vec![0.0; dim];
    let mut p = vec![0.0; dim];
    let mut grad_new = vec![0.0; dim];

    let mut welford = Welford::new(dim);
    let mut warnings = Vec::new();
    let mut window_accepts = 0usize;
    let mut draws = Vec::with_capacity(config.n_draws * dim);
    let mut accepted = 0usize;

    for iter in 0..n_warmup + config.n_draws {
        for (pi, m) in p.iter_mut().zip(&lf.inv_mass) {
            let z: f64 = rng.sample(StandardNormal);
            *pi = z / m.sqrt();
        }
        let h0 = -lp + lf.kinetic(&p);
        x_new.copy_from_slice(&x);
        grad_new.copy_from_slice(&grad);
        let end = lf.integrate(&mut x_new, &mut p, &mut grad_new, step);
        let accept_prob = match end {
            Some(lp_new) => acceptance_probability(-h0, lp_new - lf.kinetic(&p)),
            None => 0.0,
        };
        let u: f64 = rng.random();
        let moved = u < accept_prob;
        if moved {
            std::mem::swap(&mut x, &mut x_new);
            std::mem::swap(&mut grad, &mut grad_new);
            lp = end.unwrap_or(lp);
        }

        if iter < n_warmup {
            window_accepts += moved as usize;
            dual.advance(accept_prob, target_accept);
            step = dual.step();
            if iter >= slow_start && iter < slow_end {
                welford.push(&x);
            }
            if iter + 1 == slow_end && welford.count > 2 {
                lf.inv_mass = welford.regularized_variance();
                dual = DualAverage::new(step);
            }
            if iter + 1 == n_warmup {
                step = dual.adapted_step();
            }
            if (iter + 1) % ADAPT_WINDOW == 0 || iter + 1 == n_warmup {
                if window_accepts == 0 {
                    warnings.push(format!(
                        "no trajectory accepted during warmup iterations {}..{}",
                        iter - iter % ADAPT_WINDOW,
                        iter + 1
                    ));
                }
                window_accepts = 0;
            }
        } else {
            accepted += moved as usize;
            draws.extend_from_slice(&x);
        }
    }

    ChainRun {
        draws,
        accepted,
        warnings,
    }
}

struct Welford {
    count: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Welford {
    fn new(dim: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        for i in 0..x.len() {
            let delta = x[i] - self.mean[i];
            self.mean[i] += delta / n;
            self.m2[i] += delta * (x[i] - self.mean[i]);
        }
    }

    /// Sample variance with a tiny floor. Posterior scales here span many
    /// orders of magnitude, so there is no absolute shrinkage target.
    fn regularized_variance(&self) -> Vec<f64> {
        let n = self.count as f64;
        self.m2
            .iter()
            .map(|m2| {
                let var = m2 / (n - 1.0);
                if var.is_finite() && var > 0.0 {
                    var.max(1e-12)
                } else {
                    1.0
                }
            })
            .collect()
    }
}
