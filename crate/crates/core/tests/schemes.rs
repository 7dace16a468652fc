use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use splitkit::order::{order_of, Model};
use splitkit::schemes::{
    catalog_get, commutator_free_identity_suite, compile_autonomous, compile_frozen_flows, compile_nonautonomous,
    parse_scheme, random_classical_scheme, serialize_scheme, to_commutator_free, Coefficient, Factor, Placement,
    Scheme, SchemeError,
};
use splitkit::series::{double_commutator_bba, Alphabet, Series};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[test]
fn commutator_free_identity_on_fifty_random_schemes() {
    let r = commutator_free_identity_suite(50, 4, 8, 7).unwrap();
    assert!(r.passed(), "mismatching schemes: {:?}", r.mismatches);
    assert_eq!(r.schemes, 50);
    assert!(r.words_compared > 0);
}

#[test]
fn strang_commutator_free_stages() {
    let cf = to_commutator_free(&catalog_get("strang").unwrap()).unwrap();
    let applied: Vec<(Coefficient, Coefficient)> = cf.application_order().map(|s| (s.a.clone(), s.c.clone())).collect();
    assert_eq!(
        applied,
        vec![
            (Coefficient::ratio(1, 2), Coefficient::zero()),
            (Coefficient::ratio(1, 2), Coefficient::ratio(1, 2)),
        ]
    );
    let r = order_of(&cf.into(), Model::NonautonomousK1, 4).unwrap();
    assert_eq!(r.achieved_order, 2);
}

#[test]
fn rewrite_rejects_commutator_terms() {
    let chin = catalog_get("chin").unwrap();
    assert!(matches!(to_commutator_free(&chin), Err(SchemeError::NotClassical(_))));
}

#[test]
fn mirror_reverses_words() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut schemes: Vec<Scheme> = (0..20).map(|_| random_classical_scheme(&mut rng, 4)).collect();
    schemes.push(catalog_get("chin").unwrap());
    schemes.push(catalog_get("lie_trotter").unwrap());
    for s in &schemes {
        let forward = compile_autonomous(s, 5).unwrap();
        let mirrored = compile_autonomous(&s.reversed(), 5).unwrap();
        assert_eq!(mirrored, forward.reverse_words());
    }
    for name in ["strang", "chin"] {
        let s = compile_autonomous(&catalog_get(name).unwrap(), 6).unwrap();
        assert_eq!(s, s.reverse_words(), "{name} is palindromic");
    }
    // a separate factor keeps its internal B-then-commutator order under reversal
    let sep = catalog_get("chin").unwrap().with_placement(Placement::Separate);
    let forward = compile_autonomous(&sep, 4).unwrap();
    assert_ne!(compile_autonomous(&sep.reversed(), 4).unwrap(), forward.reverse_words());
}

#[test]
fn placements_agree_through_degree_three() {
    let chin = catalog_get("chin").unwrap();
    let combined = compile_autonomous(&chin, 3).unwrap();
    let separate = compile_autonomous(&chin.with_placement(Placement::Separate), 3).unwrap();
    assert_eq!(combined, separate);
}

#[test]
fn placements_differ_at_degree_four_by_half_bc_commutator() {
    let alpha = Alphabet::two_letter();
    let b = Series::generator(alpha.clone(), 4, "B").unwrap();
    let c = double_commutator_bba(&alpha, 4).unwrap();
    let bracket = b.commutator(&c).unwrap();
    let chin = catalog_get("chin").unwrap();
    let combined = compile_autonomous(&chin, 4).unwrap();
    let separate = compile_autonomous(&chin.with_placement(Placement::Separate), 4).unwrap();
    // one generalized flow with b = 2/3, c = -1/72
    let expected = bracket.scale(&(q(1, 2) * q(2, 3) * q(-1, 72)));
    let diff = separate.sub(&combined).unwrap();
    assert!(!diff.is_zero());
    assert_eq!(diff, expected);
}

#[test]
fn placements_agree_in_quadratic_model() {
    let chin = catalog_get("chin").unwrap();
    for n in [4, 6] {
        let combined = compile_nonautonomous(&chin, 2, n).unwrap();
        let separate = compile_nonautonomous(&chin.with_placement(Placement::Separate), 2, n).unwrap();
        assert_eq!(combined, separate);
    }
}

#[test]
fn nonautonomous_order_at_least_autonomous_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let mut schemes: Vec<Scheme> = (0..15).map(|_| random_classical_scheme(&mut rng, 3)).collect();
    for name in ["lie_trotter", "strang", "chin"] {
        schemes.push(catalog_get(name).unwrap());
    }
    for s in &schemes {
        let auto = order_of(&s.clone().into(), Model::Autonomous, 5).unwrap();
        for model in [Model::NonautonomousK1, Model::NonautonomousK2] {
            let r = order_of(&s.clone().into(), model, 5).unwrap();
            assert!(r.achieved_order >= auto.achieved_order, "{model}: {} < {}", r.achieved_order, auto.achieved_order);
        }
    }
}

#[test]
fn lie_derivative_and_frozen_flow_routes_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut schemes: Vec<Scheme> = (0..10).map(|_| random_classical_scheme(&mut rng, 3)).collect();
    schemes.push(catalog_get("chin").unwrap());
    for s in &schemes {
        for k in [1, 2] {
            assert_eq!(compile_nonautonomous(s, k, 5).unwrap(), compile_frozen_flows(s, k, 5).unwrap());
        }
    }
}

#[test]
fn chin_without_commutator_drops_to_order_two() {
    let s = catalog_get("chin").unwrap().with_zero_c();
    assert_eq!(order_of(&s.into(), Model::Autonomous, 5).unwrap().achieved_order, 2);
}

#[test]
fn malformed_files_report_lines() {
    let bad_kind = "name = \"x\"\n\n[[factors]]\nkind = \"A\"\na = \"1\"\n\n[[factors]]\nkind = \"Q\"\nb = \"1\"\n";
    match parse_scheme(bad_kind) {
        Err(SchemeError::Invalid { line, .. }) => assert_eq!(line, 7),
        other => panic!("expected an invalid-factor error, got {other:?}"),
    }
    let syntax = "name = \"x\"\nclaimed_order = \n";
    match parse_scheme(syntax) {
        Err(SchemeError::Syntax { line, .. }) => assert_eq!(line, 2),
        other => panic!("expected a syntax error, got {other:?}"),
    }
    let inconsistent = "name = \"x\"\nclaimed_order = 1\n[[factors]]\nkind = \"A\"\na = \"1/2\"\n[[factors]]\nkind = \"B\"\nb = 1\n";
    assert!(matches!(parse_scheme(inconsistent), Err(SchemeError::Inconsistent { .. })));
    assert!(matches!(parse_scheme("name = \"x\"\n"), Err(SchemeError::Empty)));
}

fn coefficient() -> impl Strategy<Value = Coefficient> {
    prop_oneof![
        (-20i64..=20, 1i64..=30).prop_map(|(n, d)| Coefficient::ratio(n, d)),
        (-2.0f64..2.0).prop_map(Coefficient::Float),
    ]
}

fn factor() -> impl Strategy<Value = Factor> {
    prop_oneof![
        coefficient().prop_map(Factor::a),
        coefficient().prop_map(Factor::b),
        (coefficient(), coefficient(), any::<bool>()).prop_map(|(b, c, sep)| {
            Factor::b_generalized(b, c, if sep { Placement::Separate } else { Placement::Combined })
        }),
    ]
}

proptest! {
    #[test]
    fn serialize_parse_round_trip(factors in proptest::collection::vec(factor(), 1..8), name in "[a-z][a-z0-9_]{0,10}") {
        let s = Scheme::new(name, factors, None).unwrap();
        let text = serialize_scheme(&s);
        let back = parse_scheme(&text).unwrap();
        prop_assert_eq!(back, s);
    }
}
