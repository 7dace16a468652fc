use splitkit::config::Config;
use splitkit::order::{order_of, Model};
use splitkit::schemes::{rationalize, Coefficient, Pattern, SlotRole};
use splitkit::search::{feasibility_experiment, positive_recovery, search, SearchProblem, Verdict, Weighting};

#[test]
fn recovers_chin_under_positivity() {
    let sp = SearchProblem::new(Pattern::chin_shape(), 4, Model::Autonomous)
        .nonnegative(&[SlotRole::FlowA, SlotRole::FlowB])
        .starts(20)
        .seed(1);
    let r = search(&sp).unwrap();
    assert_eq!(r.verdict, Verdict::Feasible);
    let c = r.symbolic_confirmation.unwrap();
    assert!(c.order.achieved_order >= 4);
    let mut values = c.coefficients.clone();
    values.sort();
    let mut chin = vec!["1/6", "1/6", "1/2", "1/2", "2/3", "-1/72"];
    chin.sort();
    assert_eq!(values, chin);
}

#[test]
fn two_stage_classical_cannot_reach_order_three() {
    for nonneg in [&[SlotRole::FlowA, SlotRole::FlowB][..], &[]] {
        let sp = SearchProblem::new(Pattern::classical(2), 3, Model::Autonomous)
            .nonnegative(nonneg)
            .starts(10)
            .seed(3);
        let r = search(&sp).unwrap();
        assert_eq!(r.verdict, Verdict::Infeasible, "{nonneg:?}: best {:e}", r.best_residual);
        assert!(r.symbolic_confirmation.is_none());
    }
}

#[test]
fn feasible_points_are_confirmed_exactly() {
    let sp = SearchProblem::new(Pattern::classical(2), 2, Model::Autonomous)
        .nonnegative(&[SlotRole::FlowA, SlotRole::FlowB])
        .starts(10)
        .seed(4);
    let r = search(&sp).unwrap();
    assert_eq!(r.verdict, Verdict::Feasible);
    let c = r.symbolic_confirmation.as_ref().unwrap();
    let again = order_of(&c.method, Model::Autonomous, 2).unwrap();
    assert!(again.achieved_order >= 2);
    assert!(!r.hits(1e-10).is_empty());
}

#[test]
fn per_start_residuals_do_not_depend_on_start_count() {
    let base = SearchProblem::new(Pattern::classical(3), 3, Model::Autonomous).seed(11);
    let few = search(&base.clone().starts(4)).unwrap();
    let many = search(&base.starts(8)).unwrap();
    assert_eq!(few.per_start[..], many.per_start[..4]);
}

#[test]
fn weighting_scales_the_reported_residual() {
    let mut settings = splitkit::search::SearchSettings::default();
    let base = SearchProblem::new(Pattern::classical(2), 3, Model::Autonomous)
        .nonnegative(&[SlotRole::FlowA, SlotRole::FlowB])
        .starts(6)
        .seed(2);
    let relative = search(&base.clone().settings(settings.clone())).unwrap();
    settings.weighting = Weighting::Absolute;
    let absolute = search(&base.settings(settings)).unwrap();
    // degree-3 entries carry a factor 3! under relative weighting
    assert!(relative.best_residual > absolute.best_residual);
}

#[test]
fn rationalization_recovers_small_fractions() {
    for (x, expected) in [(0.5, "1/2"), (-1.0 / 72.0, "-1/72"), (2.0 / 3.0 + 1e-13, "2/3")] {
        let q = rationalize(x, 1_000_000);
        assert_eq!(Coefficient::Exact(q).to_string(), expected);
    }
}

fn small_config() -> Config {
    let mut c = Config::default();
    c.experiments.e1_starts = 30;
    c.experiments.e1_stages = vec![3];
    c.experiments.recovery_starts = 10;
    c
}

#[test]
fn e1_small_run() {
    let r = feasibility_experiment("E1_classical_p3", &small_config()).unwrap();
    assert!(r.passed, "{:?}", r.mismatches());
    assert!(r.checks.iter().any(|c| c.name.starts_with("constraint monotonicity") && c.passed));
    let annex = r.sign_annex.as_ref().unwrap();
    assert!(annex.patterns.iter().any(|p| p.strictly_negative_a));
    assert_eq!(r.stiff_demo.len(), 3);
    assert!(r.found_scheme.unwrap().contains("claimed_order = 3"));
}

#[test]
fn recovery_small_run() {
    let r = positive_recovery(&small_config()).unwrap();
    assert!(r.passed);
    assert!(r.recovered_scheme.is_some());
}

#[test]
fn unknown_experiment() {
    assert!(feasibility_experiment("E4", &Config::default()).is_err());
}
