//! Local minimizers used per start: an adaptive Nelder–Mead simplex and a
//! finite-difference Levenberg–Marquardt polish for least-squares problems.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

/// Nelder–Mead with dimension-dependent coefficients (Gao and Han, 2012).
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], step: f64, max_iter: usize) -> Minimum {
    let n = x0.len();
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = if n >= 2 {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += if x[i].abs() > 1e-3 { step * x[i].abs().max(0.5) } else { step };
        let v = eval(&x);
        simplex.push((x, v));
    }
    let mut iterations = 0;
    while iterations < max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if best <= 1e-30 || (worst - best) <= 1e-15 * best.abs() + 1e-32 {
            break;
        }
        iterations += 1;
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / nf;
            }
        }
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
            let xe = along(alpha * beta);
            let fe = eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = along(alpha * gamma);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(-gamma);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let x_best = simplex[0].0.clone();
                for (x, v) in simplex.iter_mut().skip(1) {
                    for (xi, bi) in x.iter_mut().zip(&x_best) {
                        *xi = bi + delta * (*xi - bi);
                    }
                    *v = eval(x);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Minimum { x, value, iterations }
}

/// Levenberg–Marquardt on `||r(x)||^2` with a forward-difference Jacobian.
pub fn levenberg_marquardt<R: Fn(&[f64]) -> Vec<f64>>(r: R, x0: &[f64], max_iter: usize) -> Minimum {
    let n = x0.len();
    let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    let mut x = x0.to_vec();
    let mut res = r(&x);
    let mut value = sq(&res);
    if !value.is_finite() {
        return Minimum { x, value, iterations: 0 };
    }
    let m = res.len();
    let mut lambda = 1e-3;
    let mut iterations = 0;
    while iterations < max_iter && value > 1e-32 {
        iterations += 1;
        let mut jac = DMatrix::<f64>::zeros(m, n);
        for j in 0..n {
            let h = 1e-7 * x[j].abs().max(1.0);
            let mut xh = x.clone();
            xh[j] += h;
            let rh = r(&xh);
            for i in 0..m {
                jac[(i, j)] = (rh[i] - res[i]) / h;
            }
        }
        let rv = DVector::from_column_slice(&res);
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * rv;
        let mut improved = false;
        for _ in 0..12 {
            let mut lhs = jtj.clone();
            for i in 0..n {
                lhs[(i, i)] += lambda * (jtj[(i, i)] + 1e-12);
            }
            let Some(step) = lhs.cholesky().map(|c| c.solve(&(-&g))) else {
                lambda *= 4.0;
                continue;
            };
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let tr = r(&trial);
            let tv = sq(&tr);
            if tv < value {
                let small = step.norm() <= 1e-15 * (1.0 + x.iter().map(|v| v * v).sum::<f64>().sqrt());
                x = trial;
                res = tr;
                value = tv;
                lambda = (lambda / 3.0).max(1e-12);
                improved = !small;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    Minimum { x, value, iterations }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nelder_mead_rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead(f, &[-1.2, 1.0], 0.1, 2000);
        assert!(m.value < 1e-12, "{m:?}");
        assert!((m.x[0] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn lm_solves_square_system() {
        let r = |x: &[f64]| vec![x[0] * x[0] + x[1] * x[1] - 1.0, x[0] - x[1]];
        let m = levenberg_marquardt(r, &[1.0, 0.2], 100);
        assert!(m.value < 1e-28);
        assert!((m.x[0] - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn lm_stops_at_nonzero_floor() {
        let r = |x: &[f64]| vec![x[0] - 1.0, x[0] + 1.0];
        let m = levenberg_marquardt(r, &[3.0], 100);
        assert!((m.value - 2.0).abs() < 1e-12);
    }
}
