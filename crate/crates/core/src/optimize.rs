//! Derivative-free simplex minimization.

#[derive(Clone, Debug, PartialEq)]
pub struct NmOptions {
    pub step: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NmOptions {
    fn default() -> Self {
        NmOptions {
            step: 0.2,
            tol: 1e-10,
            max_iter: 4000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0` with the standard reflection / expansion /
/// contraction / shrink moves.
pub fn nelder_mead(f: impl Fn(&[f64]) -> f64, x0: &[f64], opts: &NmOptions) -> NmResult {
    let d = x0.len();
    if d == 0 {
        return NmResult {
            x: vec![],
            f: f(&[]),
            iterations: 0,
            converged: true,
        };
    }
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..d {
        let mut p = x0.to_vec();
        p[i] += opts.step;
        simplex.push(p);
    }
    let mut vals: Vec<f64> = simplex.iter().map(|p| f(p)).collect();
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        let mut idx: Vec<usize> = (0..=d).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        vals = idx.iter().map(|&i| vals[i]).collect();

        let spread = (vals[d] - vals[0]).abs();
        let size = simplex[1..]
            .iter()
            .map(|p| p.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= opts.tol && size <= opts.tol.sqrt() {
            converged = true;
            break;
        }
        iterations += 1;

        let mut cen = vec![0.0; d];
        for p in &simplex[..d] {
            for (c, x) in cen.iter_mut().zip(p) {
                *c += x / d as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            cen.iter()
                .zip(&simplex[d])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let xr = along(-alpha);
        let fr = f(&xr);
        if fr < vals[0] {
            let xe = along(-gamma);
            let fe = f(&xe);
            if fe < fr {
                simplex[d] = xe;
                vals[d] = fe;
            } else {
                simplex[d] = xr;
                vals[d] = fr;
            }
            continue;
        }
        if fr < vals[d - 1] {
            simplex[d] = xr;
            vals[d] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[d] {
            let x = along(-rho);
            let v = f(&x);
            (x, v)
        } else {
            let x = along(rho);
            let v = f(&x);
            (x, v)
        };
        if fc < vals[d].min(fr) {
            simplex[d] = xc;
            vals[d] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=d {
            for (x, b) in simplex[i].iter_mut().zip(&best) {
                *x = b + sigma * (*x - b);
            }
            vals[i] = f(&simplex[i]);
        }
    }
    let i = (0..=d).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    NmResult {
        x: simplex[i].clone(),
        f: vals[i],
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = nelder_mead(f, &[-1.2, 1.0], &NmOptions::default());
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn quadratic_in_four_dims() {
        let f = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (i as f64 + 1.0) * (v - 0.5).powi(2)).sum();
        let r = nelder_mead(f, &[0.0; 4], &NmOptions::default());
        assert!(r.f < 1e-9);
    }
}
