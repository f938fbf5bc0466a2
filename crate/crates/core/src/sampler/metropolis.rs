//! Adaptive random-walk Metropolis.
//!
//! Proposals are `x + lambda * L z` with `z` standard normal and `L` a
//! lower-triangular factor of the proposal covariance. During warmup the
//! global scale `lambda` follows a Robbins-Monro recursion on the acceptance
//! probability, and at the end of every adaptation window the covariance is
//! re-estimated from the warmup draws collected so far. Both are frozen once
//! warmup ends, so the post-warmup chain is a plain Metropolis chain.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{ChainConfig, ChainRun, LogDensity, ADAPT_WINDOW};
use crate::rng::ChaCha8Rng;

/// Minimum number of accepted moves among the collected warmup draws before
/// the empirical covariance replaces the current proposal shape.
const MIN_MOVES_FOR_COVARIANCE: usize = 20;

pub(crate) fn run_chain<D: LogDensity + ?Sized>(
    target: &D,
    init: &[f64],
    config: &ChainConfig,
    rng: &mut ChaCha8Rng,
) -> ChainRun {
    let dim = init.len();
    let target_accept = config.target_accept_for(dim);
    let adapt = config.proposal_scale_override.is_none();

    let (mut chol, mut log_lambda) = match config.proposal_scale_override {
        Some(s) if s == 0.0 => (identity(dim), f64::NEG_INFINITY),
        Some(s) => (identity(dim), s.ln()),
        None => match laplace_cholesky(target, init) {
            Some(l) => (l, (2.38 / (dim as f64).sqrt()).ln()),
            None => (identity(dim), config.initial_step_size.ln()),
        },
    };

    let mut x = init.to_vec();
    let mut lp = target.log_density(&x);
    let mut proposal = vec![0.0; dim];
    let mut z = vec![0.0; dim];

    let mut warnings = Vec::new();
    let mut window_accepts = 0usize;
    let mut collected: Vec<Vec<f64>> = Vec::new();
    let mut collected_moves = 0usize;

    let total = config.n_warmup + config.n_draws;
    let mut draws = Vec::with_capacity(config.n_draws * dim);
    let mut accepted = 0usize;

    for iter in 0..total {
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        let lambda = log_lambda.exp();
        for i in 0..dim {
            let step: f64 = (0..=i).map(|j| chol[i][j] * z[j]).sum();
            proposal[i] = x[i] + lambda * step;
        }
        let lp_new = target.log_density(&proposal);
        let accept_prob = acceptance_probability(lp, lp_new);
        let u: f64 = rng.random();
        let moved = u < accept_prob;
        if moved {
            x.copy_from_slice(&proposal);
            lp = lp_new;
        }

        if iter < config.n_warmup {
            window_accepts += moved as usize;
            if adapt {
                let gain = ((iter + 1) as f64).powf(-0.6);
                log_lambda += gain * (accept_prob - target_accept);
                // Draws from the first window are mostly transient.
                if iter >= ADAPT_WINDOW {
                    collected.push(x.clone());
                    collected_moves += moved as usize;
                }
            }
            let window_end = (iter + 1) % ADAPT_WINDOW == 0 || iter + 1 == config.n_warmup;
            if window_end {
                if window_accepts == 0 {
                    warnings.push(format!(
                        "no proposal accepted during warmup iterations {}..{}",
                        iter - iter % ADAPT_WINDOW,
                        iter + 1
                    ));
                }
                window_accepts = 0;
                if adapt && collected_moves >= MIN_MOVES_FOR_COVARIANCE && collected.len() > dim + 1 {
                    if let Some(l) = empirical_cholesky(&collected) {
                        chol = l;
                        log_lambda = (2.38 / (dim as f64).sqrt()).ln();
                    }
                }
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

pub(crate) fn acceptance_probability(lp_old: f64, lp_new: f64) -> f64 {
    if lp_new.is_nan() || lp_new == f64::NEG_INFINITY {
        return 0.0;
    }
    let diff = lp_new - lp_old;
    if diff >= 0.0 {
        1.0
    } else {
        diff.exp()
    }
}

/// Cholesky factor of the inverse negative Hessian at `x` (central
/// differences), when that matrix is positive definite. Near a mode this is
/// the Laplace approximation's covariance, a far better starting proposal
/// shape than the identity for narrow or correlated posteriors.
fn laplace_cholesky<D: LogDensity + ?Sized>(target: &D, x: &[f64]) -> Option<Vec<Vec<f64>>> {
    let dim = x.len();
    let h: Vec<f64> = x.iter().map(|v| 1e-4 * v.abs().max(1.0)).collect();
    let f0 = target.log_density(x);
    let mut pt = x.to_vec();
    let mut f = |moves: &[(usize, f64)]| {
        pt.copy_from_slice(x);
        for &(i, d) in moves {
            pt[i] += d;
        }
        target.log_density(&pt)
    };
    let mut neg_h = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        neg_h[i][i] = -(f(&[(i, h[i])]) - 2.0 * f0 + f(&[(i, -h[i])])) / (h[i] * h[i]);
        for j in 0..i {
            let v = f(&[(i, h[i]), (j, h[j])]) - f(&[(i, h[i]), (j, -h[j])]) - f(&[(i, -h[i]), (j, h[j])])
                + f(&[(i, -h[i]), (j, -h[j])]);
            neg_h[i][j] = -v / (4.0 * h[i] * h[j]);
            neg_h[j][i] = neg_h[i][j];
        }
    }
    if neg_h.iter().flatten().any(|v| !v.is_finite()) {
        return None;
    }
    let l = cholesky(&neg_h)?;
    // inverse(-H) = L^-T L^-1; factor it by inverting L column by column.
    let mut l_inv = vec![vec![0.0; dim]; dim];
    for c in 0..dim {
        for i in c..dim {
            let rhs = if i == c { 1.0 } else { 0.0 };
            let s: f64 = (c..i).map(|k| l[i][k] * l_inv[k][c]).sum();
            l_inv[i][c] = (rhs - s) / l[i][i];
        }
    }
    let cov: Vec<Vec<f64>> = (0..dim)
        .map(|i| (0..dim).map(|j| (0..dim).map(|k| l_inv[k][i] * l_inv[k][j]).sum()).collect())
        .collect();
    cholesky(&cov)
}

fn identity(dim: usize) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// Cholesky factor of the regularised sample covariance of `points`.
fn empirical_cholesky(points: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = points.len() as f64;
    let dim = points[0].len();
    let mut mean = vec![0.0; dim];
    for p in points {
        for (m, v) in mean.iter_mut().zip(p) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut cov = vec![vec![0.0; dim]; dim];
    for p in points {
        for i in 0..dim {
            let di = p[i] - mean[i];
            for j in 0..=i {
                cov[i][j] += di * (p[j] - mean[j]);
            }
        }
    }
    for i in 0..dim {
        for j in 0..=i {
            cov[i][j] /= n - 1.0;
            cov[j][i] = cov[i][j];
        }
    }
    // Shrink slightly towards the diagonal so a direction the chain has
    // barely explored keeps a usable scale.
    for i in 0..dim {
        let d = cov[i][i];
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        cov[i][i] = d * (1.0 + 1e-6) + 1e-300;
    }
    cholesky(&cov)
}

pub(crate) fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if !(d > 0.0) {
                    return None;
                }
                l[i][j] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}
