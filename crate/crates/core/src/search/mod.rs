//! Multi-start least-squares search for scheme coefficients that satisfy the
//! order conditions, optionally with sign constraints on flow coefficients.
//!
//! Each start runs a Nelder–Mead descent on `||r||^2` followed by a
//! Levenberg–Marquardt polish, where `r` is the residual vector from
//! [`crate::order::ResidualKernel`]. Nonnegative slots are parametrized as
//! `x^2`. A point below the feasibility tolerance only counts as feasible once
//! its rationalization passes the exact order check.

mod experiments;
mod optim;

pub use experiments::{
    feasibility_experiment, positive_recovery, CaseReport, Check, RecoveryReport, ResidualSummary, SlotValue, ExperimentReport, SignAnnex, SignPattern, EXPERIMENTS,
    REPORT_CAVEAT, SCHEMA_VERSION,
};
pub use optim::{levenberg_marquardt, nelder_mead, Minimum};

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::order::{order_of, Model, OrderError, OrderReport, ResidualKernel};
use crate::schemes::{rationalize, Coefficient, Method, Pattern, SchemeError, SlotInfo, SlotRole};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("pattern has no free slots")]
    NoFreeSlots,
    #[error("{got} sign constraints for {expected} free slots")]
    ConstraintCount { expected: usize, got: usize },
    #[error("search needs at least one start")]
    NoStarts,
    #[error("unknown experiment {0:?}; known: E1_classical_p3, E2_generalized_p5, E3_cf_p6")]
    UnknownExperiment(String),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Numerics(#[from] crate::numerics::NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    Free,
    Nonnegative,
}

/// How residual entries are combined into the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    /// raw defect coefficients
    Absolute,
    /// degree-`n` defects times `n!`
    #[default]
    Relative,
}

/// Tuning shared by all searches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSettings {
    pub feasibility_tol: f64,
    pub infeasibility_floor: f64,
    pub max_iterations: usize,
    pub polish_iterations: usize,
    pub max_denominator: u64,
    /// how many sub-tolerance starts to try rationalizing
    pub confirm_candidates: usize,
    pub weighting: Weighting,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-10,
            infeasibility_floor: 1e-4,
            max_iterations: 2000,
            polish_iterations: 200,
            max_denominator: 1_000_000,
            confirm_candidates: 8,
            weighting: Weighting::Relative,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchProblem {
    pub pattern: Pattern,
    pub target_order: u32,
    pub model: Model,
    pub constraints: Vec<Constraint>,
    pub starts: usize,
    pub seed: u64,
    pub settings: SearchSettings,
}

impl SearchProblem {
    /// Unconstrained problem with 100 starts and seed 0.
    pub fn new(pattern: Pattern, target_order: u32, model: Model) -> Self {
        let constraints = vec![Constraint::Free; pattern.free_count()];
        Self {
            pattern,
            target_order,
            model,
            constraints,
            starts: 100,
            seed: 0,
            settings: SearchSettings::default(),
        }
    }

    /// Requires every free slot with one of `roles` to be nonnegative.
    pub fn nonnegative(mut self, roles: &[SlotRole]) -> Self {
        self.constraints = self
            .pattern
            .free_slots()
            .iter()
            .map(|s| {
                if roles.contains(&s.role) {
                    Constraint::Nonnegative
                } else {
                    Constraint::Free
                }
            })
            .collect();
        self
    }

    pub fn starts(mut self, starts: usize) -> Self {
        self.starts = starts;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn settings(mut self, settings: SearchSettings) -> Self {
        self.settings = settings;
        self
    }

    fn validate(&self) -> Result<(), SearchError> {
        let n = self.pattern.free_count();
        if n == 0 {
            return Err(SearchError::NoFreeSlots);
        }
        if self.constraints.len() != n {
            return Err(SearchError::ConstraintCount {
                expected: n,
                got: self.constraints.len(),
            });
        }
        if self.starts == 0 {
            return Err(SearchError::NoStarts);
        }
        let cap = self.model.max_check_cap();
        if self.target_order > cap {
            return Err(OrderError::CapExceeded {
                model: self.model,
                requested: self.target_order,
                cap,
            }
            .into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// residual below tolerance and confirmed exactly at rational coefficients
    Feasible,
    /// residual below tolerance, but no rationalization passed the exact check
    NumericallyFeasibleUnconfirmed,
    /// best residual above the infeasibility floor
    Infeasible,
    /// best residual between the tolerance and the floor
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Feasible => "feasible",
            Verdict::NumericallyFeasibleUnconfirmed => "numerically_feasible_unconfirmed",
            Verdict::Infeasible => "infeasible",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StartOutcome {
    pub start: usize,
    /// Euclidean norm of the (weighted) residual vector at the end of the start
    pub residual: f64,
    #[serde(skip)]
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Confirmation {
    /// rationalized coefficients, in free-slot order
    pub coefficients: Vec<String>,
    pub start: usize,
    pub order: OrderReport,
    #[serde(skip)]
    pub method: Method,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub slots: Vec<SlotInfo>,
    pub best_start: usize,
    pub best_coeffs: Vec<f64>,
    pub best_residual: f64,
    pub feasible: bool,
    pub verdict: Verdict,
    pub per_start: Vec<StartOutcome>,
    pub symbolic_confirmation: Option<Confirmation>,
}

impl SearchResult {
    /// Starts whose final residual is below `tol`, ordered by residual.
    pub fn hits(&self, tol: f64) -> Vec<&StartOutcome> {
        let mut v: Vec<_> = self.per_start.iter().filter(|s| s.residual < tol).collect();
        v.sort_by(|a, b| a.residual.total_cmp(&b.residual).then(a.start.cmp(&b.start)));
        v
    }
}

fn to_values(y: &[f64], constraints: &[Constraint]) -> Vec<f64> {
    y.iter()
        .zip(constraints)
        .map(|(&v, c)| match c {
            Constraint::Free => v,
            Constraint::Nonnegative => v * v,
        })
        .collect()
}

fn run_start(kernel: &ResidualKernel, sp: &SearchProblem, start: usize) -> StartOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(sp.seed);
    rng.set_stream(start as u64);
    let y0: Vec<f64> = sp
        .constraints
        .iter()
        .map(|c| match c {
            Constraint::Free => rng.random_range(-1.0..=1.0),
            Constraint::Nonnegative => rng.random_range(0.0f64..=1.0).sqrt(),
        })
        .collect();
    let relative = sp.settings.weighting == Weighting::Relative;
    let residuals = |y: &[f64]| {
        let x = to_values(y, &sp.constraints);
        if relative {
            kernel.eval_relative(&x)
        } else {
            kernel.eval(&x)
        }
    };
    let objective = |y: &[f64]| residuals(y).iter().map(|r| r * r).sum::<f64>();
    let nm = nelder_mead(objective, &y0, 0.1, sp.settings.max_iterations);
    let lm = levenberg_marquardt(residuals, &nm.x, sp.settings.polish_iterations);
    let (y, value) = if lm.value <= nm.value { (lm.x, lm.value) } else { (nm.x, nm.value) };
    let coeffs = to_values(&y, &sp.constraints);
    let residual = if value.is_finite() { value.sqrt() } else { f64::INFINITY };
    StartOutcome {
        start,
        residual,
        coeffs,
    }
}

/// Rounds `coeffs` to rationals and checks the order exactly. Rounding is
/// projected back onto the constraint set (negative round-offs of
/// nonnegative slots become 0).
pub fn confirm(
    pattern: &Pattern,
    coeffs: &[f64],
    constraints: &[Constraint],
    target_order: u32,
    model: Model,
    max_denominator: u64,
) -> Result<Option<(Vec<BigRational>, OrderReport, Method)>, SearchError> {
    let exact: Vec<BigRational> = coeffs
        .iter()
        .zip(constraints)
        .map(|(&x, c)| {
            let q = rationalize(x, max_denominator);
            match c {
                Constraint::Nonnegative if q < BigRational::from_integer(0.into()) => {
                    BigRational::from_integer(0.into())
                }
                _ => q,
            }
        })
        .collect();
    let method = pattern.instantiate(&exact.iter().cloned().map(Coefficient::Exact).collect::<Vec<_>>())?;
    let report = order_of(&method, model, target_order)?;
    Ok((report.achieved_order >= target_order).then_some((exact, report, method)))
}

pub fn search(sp: &SearchProblem) -> Result<SearchResult, SearchError> {
    sp.validate()?;
    let kernel = ResidualKernel::new(&sp.pattern, sp.target_order, sp.model)?;
    let per_start: Vec<StartOutcome> = (0..sp.starts)
        .into_par_iter()
        .map(|i| run_start(&kernel, sp, i))
        .collect();
    let best = per_start
        .iter()
        .min_by(|a, b| a.residual.total_cmp(&b.residual).then(a.start.cmp(&b.start)))
        .expect("at least one start");
    let best_residual = best.residual;
    let feasible = best_residual < sp.settings.feasibility_tol;
    let mut symbolic_confirmation = None;
    let mut result = SearchResult {
        slots: sp.pattern.free_slots(),
        best_start: best.start,
        best_coeffs: best.coeffs.clone(),
        best_residual,
        feasible,
        verdict: Verdict::Inconclusive,
        per_start: Vec::new(),
        symbolic_confirmation: None,
    };
    result.per_start = per_start;
    if feasible {
        for hit in result.hits(sp.settings.feasibility_tol).into_iter().take(sp.settings.confirm_candidates) {
            if let Some((exact, order, method)) = confirm(
                &sp.pattern,
                &hit.coeffs,
                &sp.constraints,
                sp.target_order,
                sp.model,
                sp.settings.max_denominator,
            )? {
                symbolic_confirmation = Some(Confirmation {
                    coefficients: exact.iter().map(|q| q.to_string()).collect(),
                    start: hit.start,
                    order,
                    method,
                });
                break;
            }
        }
    }
    result.verdict = if feasible {
        if symbolic_confirmation.is_some() {
            Verdict::Feasible
        } else {
            Verdict::NumericallyFeasibleUnconfirmed
        }
    } else if best_residual > sp.settings.infeasibility_floor {
        Verdict::Infeasible
    } else {
        Verdict::Inconclusive
    };
    result.symbolic_confirmation = symbolic_confirmation;
    Ok(result)
}
