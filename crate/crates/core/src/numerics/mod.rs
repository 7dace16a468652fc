//! Floating-point side: matrix exponentials, one-step application of schemes
//! to linear test problems, reference solutions and empirical order fits.

mod expm;
mod stiff;

pub use expm::expm;
pub use stiff::{stiff_demo, stiff_demo_with, StiffReport, STIFF_POTENTIAL_SEED};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::schemes::{Factor, Method, Placement, Scheme};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{0}")]
    Incompatible(&'static str),
    #[error("step size must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("time grid: {0}")]
    BadGrid(String),
    #[error("only {usable} usable points after filtering (need 3)")]
    TooFewPoints { usable: usize },
    #[error("grid size must be at least 16, got {0}")]
    GridTooSmall(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemKind {
    /// `u' = (A + B) u`
    Autonomous { a: DMatrix<f64>, b: DMatrix<f64> },
    /// `u' = (H0 + t H1 + ... + t^k Hk) u`
    PolynomialT { h: Vec<DMatrix<f64>> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProblem {
    kind: ProblemKind,
    u0: DVector<f64>,
    t_end: f64,
}

impl LinearProblem {
    pub fn new(kind: ProblemKind, u0: DVector<f64>, t_end: f64) -> Result<Self, NumericsError> {
        let d = u0.len();
        let mats: Vec<&DMatrix<f64>> = match &kind {
            ProblemKind::Autonomous { a, b } => vec![a, b],
            ProblemKind::PolynomialT { h } => {
                if h.is_empty() || h.len() > 3 {
                    return Err(NumericsError::Incompatible("polynomial problems take H0 plus up to two more matrices"));
                }
                h.iter().collect()
            }
        };
        for m in mats {
            if !m.is_square() {
                return Err(NumericsError::NonSquare {
                    rows: m.nrows(),
                    cols: m.ncols(),
                });
            }
            if m.nrows() != d {
                return Err(NumericsError::DimensionMismatch {
                    expected: d,
                    got: m.nrows(),
                });
            }
            if m.iter().any(|x| !x.is_finite()) {
                return Err(NumericsError::NonFinite);
            }
        }
        if !(t_end >= 0.0 && t_end.is_finite()) || u0.iter().any(|x| !x.is_finite()) {
            return Err(NumericsError::NonFinite);
        }
        Ok(Self { kind, u0, t_end })
    }

    pub fn kind(&self) -> &ProblemKind {
        &self.kind
    }

    pub fn u0(&self) -> &DVector<f64> {
        &self.u0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn dimension(&self) -> usize {
        self.u0.len()
    }

    /// Coefficients of `H(t0 + x)` as a polynomial in `x`.
    fn recentred(&self, t0: f64) -> Vec<DMatrix<f64>> {
        let ProblemKind::PolynomialT { h } = &self.kind else {
            unreachable!("polynomial problems only")
        };
        let mut out = h.clone();
        if h.len() >= 2 {
            out[0] += &h[1] * t0;
        }
        if h.len() == 3 {
            out[0] += &h[2] * (t0 * t0);
            out[1] += &h[2] * (2.0 * t0);
        }
        out
    }
}

fn value(c: &crate::schemes::Coefficient) -> f64 {
    c.to_f64()
}

/// `[B,[B,A]] = BBA - 2BAB + ABB` as a matrix.
pub fn double_commutator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let ba = b * a;
    let ab = a * b;
    b * &ba - (&ba * b) * 2.0 + &ab * b
}

/// Propagator of one step of a splitting scheme on an autonomous problem.
pub fn step_matrix(scheme: &Scheme, a: &DMatrix<f64>, b: &DMatrix<f64>, tau: f64) -> Result<DMatrix<f64>, NumericsError> {
    let d = a.nrows();
    let mut p = DMatrix::<f64>::identity(d, d);
    let mut comm = None;
    for f in scheme.application_order() {
        let e = match f {
            Factor::A { a: x } => expm(&(a * (value(x) * tau)))?,
            Factor::B { b: y, c, placement } => {
                let flow = b * (value(y) * tau);
                if c.is_zero() {
                    expm(&flow)?
                } else {
                    let cm = comm.get_or_insert_with(|| double_commutator(a, b));
                    let extra = &*cm * (value(c) * tau.powi(3));
                    match placement {
                        Placement::Combined => expm(&(flow + extra))?,
                        Placement::Separate => expm(&extra)? * expm(&flow)?,
                    }
                }
            }
        };
        p = e * p;
    }
    Ok(p)
}

/// One step of size `tau` from time `t0` (the start time only matters for
/// polynomial problems).
pub fn apply_scheme(
    method: &Method,
    prob: &LinearProblem,
    t0: f64,
    tau: f64,
    u: &DVector<f64>,
) -> Result<DVector<f64>, NumericsError> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(NumericsError::BadStep(tau));
    }
    if u.len() != prob.dimension() {
        return Err(NumericsError::DimensionMismatch {
            expected: prob.dimension(),
            got: u.len(),
        });
    }
    match (method, &prob.kind) {
        (Method::Splitting(s), ProblemKind::Autonomous { a, b }) => Ok(step_matrix(s, a, b, tau)? * u),
        (Method::CommutatorFree(_), ProblemKind::Autonomous { .. }) => Err(NumericsError::Incompatible(
            "commutator-free schemes need a polynomial-in-t problem",
        )),
        (Method::Splitting(s), ProblemKind::PolynomialT { h }) => {
            let h_at = |t: f64| {
                let mut m = h[0].clone();
                let mut p = 1.0;
                for hm in &h[1..] {
                    p *= t;
                    m += hm * p;
                }
                m
            };
            let mut u = u.clone();
            let mut shift = 0.0;
            for f in s.application_order() {
                match f {
                    Factor::A { a } => u = expm(&(h_at(t0 + shift) * (value(a) * tau)))? * u,
                    Factor::B { b, c, .. } => {
                        if h.len() == 3 && !c.is_zero() {
                            u = expm(&(&h[2] * (2.0 * value(c) * tau.powi(3))))? * u;
                        }
                        shift += value(b) * tau;
                    }
                }
            }
            Ok(u)
        }
        (Method::CommutatorFree(cf), ProblemKind::PolynomialT { h }) => {
            if h.len() > 2 {
                return Err(NumericsError::Incompatible(
                    "commutator-free schemes apply to u' = (H0 + t H1) u only",
                ));
            }
            let hc = prob.recentred(t0);
            let mut u = u.clone();
            for st in cf.application_order() {
                let mut m = &hc[0] * (value(&st.a) * tau);
                if hc.len() == 2 {
                    m += &hc[1] * (value(&st.c) * tau * tau);
                }
                u = expm(&m)? * u;
            }
            Ok(u)
        }
    }
}

const TAYLOR_TERMS: usize = 20;

/// Reference solution with an explicit substep count for polynomial problems.
pub fn reference_solution_substeps(prob: &LinearProblem, t: f64, substeps: usize) -> Result<DVector<f64>, NumericsError> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(NumericsError::BadStep(t));
    }
    if t == 0.0 {
        return Ok(prob.u0.clone());
    }
    match &prob.kind {
        ProblemKind::Autonomous { a, b } => Ok(expm(&((a + b) * t))? * &prob.u0),
        ProblemKind::PolynomialT { .. } => {
            let n = substeps.max(1);
            let h = t / n as f64;
            let mut u = prob.u0.clone();
            for i in 0..n {
                let hm = prob.recentred(i as f64 * h);
                // n v_n = sum_m H_m v_{n-1-m}, v_0 = u
                let mut v: Vec<DVector<f64>> = vec![u.clone()];
                let mut sum = u.clone();
                let mut hp = 1.0;
                for k in 1..=TAYLOR_TERMS {
                    let mut next = DVector::zeros(u.len());
                    for (m, hmat) in hm.iter().enumerate() {
                        if m < k {
                            next += hmat * &v[k - 1 - m];
                        }
                    }
                    next /= k as f64;
                    hp *= h;
                    sum += &next * hp;
                    v.push(next);
                }
                u = sum;
            }
            Ok(u)
        }
    }
}

fn default_substeps(prob: &LinearProblem, t: f64) -> usize {
    let ProblemKind::PolynomialT { h } = &prob.kind else {
        return 1;
    };
    // bound on ||H(s)|| over [0, t]
    let bound: f64 = h
        .iter()
        .enumerate()
        .map(|(m, hm)| hm.norm() * t.max(1.0).powi(m as i32))
        .sum();
    // h * bound <= 1/4 puts the first dropped Taylor term near 1e-32
    ((4.0 * t * bound).ceil() as usize).max(1)
}

/// Exact solution at time `t`: a single exponential for autonomous problems,
/// re-centred Taylor substeps of order 20 otherwise.
pub fn reference_solution(prob: &LinearProblem, t: f64) -> Result<DVector<f64>, NumericsError> {
    reference_solution_substeps(prob, t, default_substeps(prob, t))
}

/// Substep count used by [`reference_solution`].
pub fn reference_substeps(prob: &LinearProblem, t: f64) -> usize {
    default_substeps(prob, t)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderEstimate {
    pub slope: f64,
    /// `(tau, relative global error at t_end)`
    pub errors: Vec<(f64, f64)>,
    pub fit_range: Vec<usize>,
}

pub const ERROR_FLOOR: f64 = 1e-11;
pub const ERROR_CEILING: f64 = 0.1;

/// `0.1 * 2^-j` for `j = 0..=5`.
pub fn standard_tau_grid() -> Vec<f64> {
    (0..6).map(|j| 0.1 * 0.5f64.powi(j)).collect()
}

/// Runs `method` to `t_end` with `t_end / tau` steps.
pub fn integrate(method: &Method, prob: &LinearProblem, tau: f64) -> Result<DVector<f64>, NumericsError> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(NumericsError::BadStep(tau));
    }
    let steps = (prob.t_end / tau).round();
    if steps < 1.0 || ((steps * tau) - prob.t_end).abs() > 1e-9 * prob.t_end.max(1.0) {
        return Err(NumericsError::BadGrid(format!(
            "step {tau} does not divide t_end = {}",
            prob.t_end
        )));
    }
    let steps = steps as usize;
    match (method, &prob.kind) {
        (Method::Splitting(s), ProblemKind::Autonomous { a, b }) => {
            let p = step_matrix(s, a, b, tau)?;
            let mut u = prob.u0.clone();
            for _ in 0..steps {
                u = &p * u;
            }
            Ok(u)
        }
        _ => {
            let mut u = prob.u0.clone();
            for i in 0..steps {
                u = apply_scheme(method, prob, i as f64 * tau, tau, &u)?;
            }
            Ok(u)
        }
    }
}

/// Least-squares slope of `log error` against `log tau`.
fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub fn estimate_order(method: &Method, prob: &LinearProblem, taus: &[f64]) -> Result<OrderEstimate, NumericsError> {
    if taus.len() < 4 {
        return Err(NumericsError::BadGrid(format!("need at least 4 step sizes, got {}", taus.len())));
    }
    for w in taus.windows(2) {
        if ((w[0] / w[1]) - 2.0).abs() > 1e-9 {
            return Err(NumericsError::BadGrid("consecutive step sizes must halve".into()));
        }
    }
    let reference = reference_solution(prob, prob.t_end)?;
    let scale = reference.norm().max(f64::MIN_POSITIVE);
    let errors = taus
        .iter()
        .map(|&tau| Ok((tau, (integrate(method, prob, tau)? - &reference).norm() / scale)))
        .collect::<Result<Vec<_>, NumericsError>>()?;
    let fit_range: Vec<usize> = errors
        .iter()
        .enumerate()
        .filter(|(_, (_, e))| e.is_finite() && *e >= ERROR_FLOOR && *e <= ERROR_CEILING)
        .map(|(i, _)| i)
        .collect();
    if fit_range.len() < 3 {
        return Err(NumericsError::TooFewPoints { usable: fit_range.len() });
    }
    let pts: Vec<(f64, f64)> = fit_range.iter().map(|&i| errors[i]).collect();
    Ok(OrderEstimate {
        slope: fit_slope(&pts),
        errors,
        fit_range,
    })
}

pub const ENSEMBLE_SEEDS: [u64; 5] = [11, 23, 37, 41, 59];
pub const ENSEMBLE_DIMENSION: usize = 6;

fn unit_norm_matrix(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..=1.0));
    let s = m.singular_values().max();
    m / s
}

fn unit_vector(rng: &mut ChaCha8Rng, d: usize) -> DVector<f64> {
    let v = DVector::from_fn(d, |_, _| rng.random_range(-1.0..=1.0));
    let n = v.norm();
    v / n
}

/// Seeded `u' = (A + B) u` with `||A||_2 = ||B||_2 = 1`, `t_end = 1`.
pub fn random_autonomous_problem(seed: u64, d: usize) -> LinearProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = unit_norm_matrix(&mut rng, d);
    let b = unit_norm_matrix(&mut rng, d);
    let u0 = unit_vector(&mut rng, d);
    LinearProblem::new(ProblemKind::Autonomous { a, b }, u0, 1.0).expect("well-formed")
}

/// Seeded `u' = (H0 + t H1 [+ t^2 H2]) u` with unit-norm `H_m`, `t_end = 1`.
pub fn random_polynomial_problem(seed: u64, d: usize, k: usize) -> LinearProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0000);
    let h = (0..=k).map(|_| unit_norm_matrix(&mut rng, d)).collect();
    let u0 = unit_vector(&mut rng, d);
    LinearProblem::new(ProblemKind::PolynomialT { h }, u0, 1.0).expect("well-formed")
}

/// Order estimates over the seeded ensemble, in seed order.
pub fn ensemble_estimates(
    method: &Method,
    problems: &[LinearProblem],
    taus: &[f64],
) -> Result<Vec<OrderEstimate>, NumericsError> {
    problems.par_iter().map(|p| estimate_order(method, p, taus)).collect()
}

pub fn autonomous_ensemble() -> Vec<LinearProblem> {
    ENSEMBLE_SEEDS
        .iter()
        .map(|&s| random_autonomous_problem(s, ENSEMBLE_DIMENSION))
        .collect()
}

pub fn polynomial_ensemble(k: usize) -> Vec<LinearProblem> {
    ENSEMBLE_SEEDS
        .iter()
        .map(|&s| random_polynomial_problem(s, ENSEMBLE_DIMENSION, k))
        .collect()
}
