//! Acceptance gate: eight criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines always print. Exits
//! nonzero if any criterion fails or overruns its time budget.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::test_runner::{Config as RunnerConfig, TestRunner};
use splitkit::config::Config;
use splitkit::numerics::{autonomous_ensemble, ensemble_estimates, standard_tau_grid, stiff_demo};
use splitkit::order::{order_of, Model};
use splitkit::schemes::{catalog_get, commutator_free_identity_suite, parse_scheme, Coefficient, Method};
use splitkit::search::{feasibility_experiment, positive_recovery, ExperimentReport, Verdict};

type Outcome = Result<String, String>;

struct Criterion {
    name: &'static str,
    budget: Duration,
    run: fn(&mut Shared) -> Outcome,
}

/// Results reused by later criteria.
#[derive(Default)]
struct Shared {
    config: Config,
    e1: Option<ExperimentReport>,
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn exact_order(name: &str, expected: u32) -> Outcome {
    let s = catalog_get(name).map_err(|e| e.to_string())?;
    let r = order_of(&s.into(), Model::Autonomous, 5).map_err(|e| e.to_string())?;
    ensure(!r.lower_bound, format!("{name}: no defect through degree 5"))?;
    ensure(
        r.achieved_order == expected,
        format!("{name}: order {} instead of {expected}", r.achieved_order),
    )?;
    ensure(!r.defect.is_empty(), format!("{name}: empty defect"))?;
    Ok(format!("order {}, {} defect words at degree {}", r.achieved_order, r.defect.len(), expected + 1))
}

fn strang_order(_: &mut Shared) -> Outcome {
    exact_order("strang", 2)
}

fn chin_order(_: &mut Shared) -> Outcome {
    exact_order("chin", 4)
}

fn identity_suite(sh: &mut Shared) -> Outcome {
    let r = commutator_free_identity_suite(50, 4, 8, sh.config.seed).map_err(|e| e.to_string())?;
    ensure(r.passed(), format!("schemes {:?} differ", r.mismatches))?;
    Ok(format!("{} schemes, {} words compared", r.schemes, r.words_compared))
}

fn empirical_orders(_: &mut Shared) -> Outcome {
    let problems = autonomous_ensemble();
    let taus = standard_tau_grid();
    let chin = catalog_get("chin").map_err(|e| e.to_string())?;
    let cases = [
        (catalog_get("lie_trotter").map_err(|e| e.to_string())?, 1.0),
        (catalog_get("strang").map_err(|e| e.to_string())?, 2.0),
        (chin.clone(), 4.0),
        (chin.with_zero_c(), 2.0),
    ];
    let mut parts = Vec::new();
    for (scheme, expected) in cases {
        let est = ensemble_estimates(&scheme.clone().into(), &problems, &taus).map_err(|e| e.to_string())?;
        for (i, e) in est.iter().enumerate() {
            ensure(
                (e.slope - expected).abs() <= 0.2,
                format!("{} problem {i}: slope {:.3}, expected {expected}", scheme.name(), e.slope),
            )?;
        }
        let mean = est.iter().map(|e| e.slope).sum::<f64>() / est.len() as f64;
        parts.push(format!("{} {mean:.2}", scheme.name()));
    }
    Ok(format!("mean slopes: {}", parts.join(", ")))
}

fn check_feasible_confirmed(r: &ExperimentReport) -> Result<(), String> {
    for c in &r.cases {
        if c.verdict == Verdict::Feasible {
            let conf = c
                .symbolic_confirmation
                .as_ref()
                .ok_or_else(|| format!("{}: feasible without confirmation", c.label))?;
            ensure(
                conf.order.achieved_order >= c.target_order,
                format!("{}: confirmed order {} below target", c.label, conf.order.achieved_order),
            )?;
        }
    }
    let json = serde_json::to_value(r).map_err(|e| e.to_string())?;
    ensure(json["schema_version"].is_u64(), format!("{}: report lacks schema_version", r.name))
}

fn expect_all_infeasible(r: &ExperimentReport) -> Result<f64, String> {
    let mut lowest = f64::INFINITY;
    for c in r.cases.iter().filter(|c| c.expected.is_some()) {
        ensure(
            c.verdict == Verdict::Infeasible,
            format!("{}: {} (best {:e})", c.label, c.verdict.as_str(), c.best_residual),
        )?;
        lowest = lowest.min(c.best_residual);
    }
    Ok(lowest)
}

fn feasibility(sh: &mut Shared) -> Outcome {
    let e1 = feasibility_experiment("E1_classical_p3", &sh.config).map_err(|e| e.to_string())?;
    check_feasible_confirmed(&e1)?;
    let constrained: Vec<_> = e1.cases.iter().filter(|c| c.label.contains(">= 0")).collect();
    ensure(!constrained.is_empty(), "E1: no constrained cases")?;
    for c in &constrained {
        ensure(
            c.verdict == Verdict::Infeasible && c.best_residual > sh.config.search.infeasibility_floor,
            format!("E1 {}: {} (best {:e})", c.label, c.verdict.as_str(), c.best_residual),
        )?;
        ensure(c.starts >= 200, format!("E1 {}: only {} starts", c.label, c.starts))?;
    }
    let feasible = e1
        .cases
        .iter()
        .find(|c| c.verdict == Verdict::Feasible)
        .ok_or("E1: no feasible unconstrained case")?;
    let conf = feasible.symbolic_confirmation.as_ref().ok_or("E1: missing confirmation")?;
    let min_a = match &conf.method {
        Method::Splitting(s) => s.a_coefficients().iter().map(Coefficient::to_f64).fold(f64::INFINITY, f64::min),
        Method::CommutatorFree(_) => return Err("E1: confirmation is not a splitting".into()),
    };
    ensure(min_a < 0.0, format!("E1: min a_j = {min_a}"))?;
    let e1_lowest = constrained.iter().map(|c| c.best_residual).fold(f64::INFINITY, f64::min);

    let e2 = feasibility_experiment("E2_generalized_p5", &sh.config).map_err(|e| e.to_string())?;
    check_feasible_confirmed(&e2)?;
    let e2_lowest = expect_all_infeasible(&e2)?;
    let e3 = feasibility_experiment("E3_cf_p6", &sh.config).map_err(|e| e.to_string())?;
    check_feasible_confirmed(&e3)?;
    let e3_lowest = expect_all_infeasible(&e3)?;
    for r in [&e2, &e3] {
        for c in r.cases.iter().filter(|c| c.expected.is_some()) {
            ensure(c.starts >= 500, format!("{} {}: only {} starts", r.name, c.label, c.starts))?;
        }
    }
    sh.e1 = Some(e1);
    Ok(format!(
        "E1 constrained min {e1_lowest:.2e}, unconstrained min a_j = {min_a:.4}; E2 min {e2_lowest:.2e}; E3 min {e3_lowest:.2e}"
    ))
}

fn recovery(sh: &mut Shared) -> Outcome {
    let r = positive_recovery(&sh.config).map_err(|e| e.to_string())?;
    ensure(r.case.best_residual < 1e-10, format!("best residual {:e}", r.case.best_residual))?;
    let conf = r.case.symbolic_confirmation.as_ref().ok_or("no symbolic confirmation")?;
    ensure(
        conf.order.achieved_order >= 4,
        format!("confirmed order {}", conf.order.achieved_order),
    )?;
    Ok(format!("best residual {:.1e}, coefficients {}", r.case.best_residual, conf.coefficients.join(", ")))
}

fn stiff(sh: &mut Shared) -> Outcome {
    let n = sh.config.experiments.stiff_grid_size;
    let text = sh
        .e1
        .as_ref()
        .and_then(|r| r.found_scheme.clone())
        .ok_or("no order-3 scheme from E1")?;
    let found = parse_scheme(&text).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for (scheme, expect_blowup) in [
        (catalog_get("strang").map_err(|e| e.to_string())?, false),
        (catalog_get("chin").map_err(|e| e.to_string())?, false),
        (found, true),
    ] {
        let r = stiff_demo(&scheme, n).map_err(|e| e.to_string())?;
        ensure(
            r.blowup == expect_blowup,
            format!("{}: blowup {} (max norm {:?})", scheme.name(), r.blowup, r.max_norm),
        )?;
        let growth = r.max_norm.map_or(f64::INFINITY, |m| m / r.initial_norm);
        parts.push(format!("{} growth {growth:.3e}", scheme.name()));
    }
    Ok(parts.join(", "))
}

fn series_properties(_: &mut Shared) -> Outcome {
    let mut runner = TestRunner::new(RunnerConfig {
        cases: 100,
        failure_persistence: None,
        ..RunnerConfig::default()
    });
    runner
        .run(&common::triple(), |(x, y, z)| {
            common::ring_axioms(&x, &y, &z)?;
            common::grading_bounds(&x, &y)?;
            common::commutator_laws(&x, &y, &z)?;
            common::reversal_anti_automorphism(&x, &y)
        })
        .map_err(|e| e.to_string())?;
    runner
        .run(&common::nilpotent(), |x| common::exp_log_round_trip(&x))
        .map_err(|e| e.to_string())?;
    Ok("ring axioms, grading, commutators, reversal and exp/log on 100 cases each".into())
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { name: "1 strang symbolic order", budget: Duration::from_secs(1), run: strang_order },
        Criterion { name: "2 chin symbolic order", budget: Duration::from_secs(5), run: chin_order },
        Criterion { name: "3 commutator-free identity suite", budget: Duration::from_secs(30), run: identity_suite },
        Criterion { name: "4 empirical orders", budget: Duration::from_secs(30), run: empirical_orders },
        Criterion { name: "5 feasibility experiments", budget: Duration::from_secs(600), run: feasibility },
        Criterion { name: "6 positive-scheme recovery", budget: Duration::from_secs(120), run: recovery },
        Criterion { name: "7 stiff demonstration", budget: Duration::from_secs(10), run: stiff },
        Criterion { name: "8 series property suite", budget: Duration::from_secs(10), run: series_properties },
    ];
    let mut shared = Shared::default();
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)(&mut shared);
        let elapsed = start.elapsed();
        let over = elapsed > c.budget;
        let line = match (&outcome, over) {
            (Ok(detail), false) => format!("PASS {}: {detail}", c.name),
            (Ok(detail), true) => format!("FAIL {}: over budget; {detail}", c.name),
            (Err(why), _) => format!("FAIL {}: {why}", c.name),
        };
        if outcome.is_err() || over {
            failed += 1;
        }
        println!("{line} [{:.2}s of {}s]", elapsed.as_secs_f64(), c.budget.as_secs());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
