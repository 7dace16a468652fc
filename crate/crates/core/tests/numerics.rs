use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splitkit::numerics::{
    autonomous_ensemble, ensemble_estimates, estimate_order, polynomial_ensemble, standard_tau_grid,
};
use splitkit::order::{order_of, Model};
use splitkit::schemes::{
    catalog_get, to_commutator_free, Coefficient, Factor, Method, Scheme, CATALOG,
};

fn slopes(method: &Method, k: Option<usize>) -> Vec<f64> {
    let probs = match k {
        None => autonomous_ensemble(),
        Some(k) => polynomial_ensemble(k),
    };
    ensemble_estimates(method, &probs, &standard_tau_grid())
        .unwrap()
        .into_iter()
        .map(|e| e.slope)
        .collect()
}

fn assert_slopes(label: &str, got: &[f64], order: u32) {
    for s in got {
        assert!((s - order as f64).abs() <= 0.2, "{label}: slopes {got:?}, expected {order}");
    }
}

#[test]
fn catalog_slopes_match_symbolic_orders() {
    for name in CATALOG {
        let s = catalog_get(name).unwrap();
        let q = order_of(&s.clone().into(), Model::Autonomous, 6).unwrap().achieved_order;
        assert_slopes(name, &slopes(&s.into(), None), q);
    }
}

#[test]
fn chin_without_commutator_drops_to_second_order() {
    let s = catalog_get("chin").unwrap().with_zero_c();
    let q = order_of(&s.clone().into(), Model::Autonomous, 6).unwrap().achieved_order;
    assert_eq!(q, 2);
    assert_slopes("chin_zero_c", &slopes(&s.into(), None), 2);
}

fn random_classical(rng: &mut ChaCha8Rng, stages: usize) -> Scheme {
    // exact rationals near the uniform splitting, so the consistency sums are exactly 1
    let den = 16 * stages as i64;
    let draw = |rng: &mut ChaCha8Rng| {
        let mut v: Vec<i64> = (0..stages - 1).map(|_| 16 + rng.random_range(-8..=8)).collect();
        v.push(den - v.iter().sum::<i64>());
        v
    };
    let a = draw(rng);
    let b = draw(rng);
    let mut factors = Vec::new();
    for j in 0..stages {
        factors.push(Factor::b(Coefficient::ratio(b[j], den)));
        factors.push(Factor::a(Coefficient::ratio(a[j], den)));
    }
    Scheme::new("random", factors, None).unwrap()
}

#[test]
fn random_classical_schemes_agree_with_symbolic_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for i in 0..10 {
        let s = random_classical(&mut rng, 2 + i % 3);
        let m: Method = s.into();
        let q = order_of(&m, Model::Autonomous, 4).unwrap().achieved_order;
        let got = slopes(&m, None);
        let mean = got.iter().sum::<f64>() / got.len() as f64;
        assert_eq!(mean.round() as u32, q, "scheme {i}: slopes {got:?}");
    }
}

#[test]
fn commutator_free_strang_is_second_order() {
    let cf: Method = to_commutator_free(&catalog_get("strang").unwrap()).unwrap().into();
    assert_slopes("cf strang", &slopes(&cf, Some(1)), 2);
}

#[test]
fn polynomial_models_match_symbolic_orders() {
    // the k = 2 model is where the commutator part of a B flow maps to 2 H2
    for (model, k) in [(Model::NonautonomousK1, 1), (Model::NonautonomousK2, 2)] {
        for name in ["strang", "chin"] {
            let m: Method = catalog_get(name).unwrap().into();
            let q = order_of(&m, model, 8).unwrap().achieved_order;
            assert_slopes(&format!("{name} {model}"), &slopes(&m, Some(k)), q);
        }
    }
    let zero_c: Method = catalog_get("chin").unwrap().with_zero_c().into();
    let q = order_of(&zero_c, Model::NonautonomousK2, 8).unwrap().achieved_order;
    assert_slopes("chin_zero_c k2", &slopes(&zero_c, Some(2)), q);
}

#[test]
fn single_problem_estimate_reports_fit_range() {
    let probs = autonomous_ensemble();
    let e = estimate_order(&catalog_get("chin").unwrap().into(), &probs[0], &standard_tau_grid()).unwrap();
    assert_eq!(e.errors.len(), 6);
    assert!(e.fit_range.len() >= 3);
    for &i in &e.fit_range {
        assert!(e.errors[i].1 >= 1e-11 && e.errors[i].1 <= 0.1);
    }
}
