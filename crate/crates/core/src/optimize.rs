//! Derivative-free minimisation used to find sampler starting points.

/// Nelder-Mead simplex minimisation of `f` from `start`, with initial
/// simplex edge lengths `steps`. Non-finite function values are treated as
/// `+inf`. Returns the best vertex after `max_iter` iterations or once the
/// simplex has collapsed.
pub fn nelder_mead(f: impl Fn(&[f64]) -> f64, start: &[f64], steps: &[f64], max_iter: usize) -> Vec<f64> {
    let n = start.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), eval(start)));
    for i in 0..n {
        let mut v = start.to_vec();
        v[i] += steps[i];
        let fv = eval(&v);
        simplex.push((v, fv));
    }

    // Adaptive coefficients (Gao & Han) behave better above two dimensions.
    let nf = n as f64;
    let (alpha, gamma) = (1.0, 1.0 + 2.0 / nf);
    let (rho, shrink) = (0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);

    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if (worst - best).abs() <= 1e-12 * (best.abs() + 1e-12) && simplex_size(&simplex) < 1e-10 {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(v, _)| v[j]).sum::<f64>() / nf)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let xr = along(alpha);
        let fr = eval(&xr);
        if fr < simplex[0].1 {
            let xe = along(alpha * gamma);
            let fe = eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst {
                let xc = along(alpha * rho);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(-rho);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < worst.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let x0 = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    for j in 0..n {
                        vertex.0[j] = x0[j] + shrink * (vertex.0[j] - x0[j]);
                    }
                    vertex.1 = eval(&vertex.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0).0
}

fn simplex_size(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let x0 = &simplex[0].0;
    simplex[1..]
        .iter()
        .map(|(v, _)| v.iter().zip(x0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
}
