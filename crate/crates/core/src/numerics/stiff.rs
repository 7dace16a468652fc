//! Heat equation with a bounded potential, `u' = (A + B) u` on `n` interior
//! points of (0, 1) with homogeneous Dirichlet data.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{step_matrix, NumericsError};
use crate::schemes::Scheme;

pub const STIFF_POTENTIAL_SEED: u64 = 2024;
pub const STIFF_TAU: f64 = 0.01;
pub const STIFF_STEPS: usize = 100;
/// Growth of `||u||` over `||u0||` above which a run counts as blown up.
pub const BLOWUP_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StiffReport {
    pub scheme: String,
    pub grid_size: usize,
    pub tau: f64,
    pub steps: usize,
    pub steps_completed: usize,
    pub initial_norm: f64,
    /// `None` once the solution is no longer finite
    pub max_norm: Option<f64>,
    pub final_norm: Option<f64>,
    pub blowup: bool,
}

fn laplacian(n: usize) -> DMatrix<f64> {
    let h2 = ((n + 1) * (n + 1)) as f64;
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            -2.0 * h2
        } else if i.abs_diff(j) == 1 {
            h2
        } else {
            0.0
        }
    })
}

fn potential(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = DVector::from_fn(n, |_, _| -rng.random_range(0.0..=1.0));
    DMatrix::from_diagonal(&v)
}

/// [`stiff_demo_with`] at `tau = 0.01`, 100 steps and the fixed potential.
pub fn stiff_demo(scheme: &Scheme, n: usize) -> Result<StiffReport, NumericsError> {
    stiff_demo_with(scheme, n, STIFF_TAU, STIFF_STEPS, STIFF_POTENTIAL_SEED)
}

pub fn stiff_demo_with(
    scheme: &Scheme,
    n: usize,
    tau: f64,
    steps: usize,
    seed: u64,
) -> Result<StiffReport, NumericsError> {
    if n < 16 {
        return Err(NumericsError::GridTooSmall(n));
    }
    let a = laplacian(n);
    let b = potential(n, seed);
    let u0 = DVector::from_fn(n, |i, _| (std::f64::consts::PI * (i + 1) as f64 / (n + 1) as f64).sin());
    let initial_norm = u0.norm();
    let p = step_matrix(scheme, &a, &b, tau)?;
    let mut u = u0;
    let mut max_norm = initial_norm;
    let mut finite = true;
    let mut steps_completed = 0;
    for _ in 0..steps {
        u = &p * u;
        steps_completed += 1;
        let norm = u.norm();
        if !norm.is_finite() {
            finite = false;
            break;
        }
        max_norm = max_norm.max(norm);
        if norm > BLOWUP_FACTOR * initial_norm {
            break;
        }
    }
    Ok(StiffReport {
        scheme: scheme.name().to_string(),
        grid_size: n,
        tau,
        steps,
        steps_completed,
        initial_norm,
        max_norm: finite.then_some(max_norm),
        final_norm: finite.then(|| u.norm()),
        blowup: !finite || max_norm > BLOWUP_FACTOR * initial_norm,
    })
}
