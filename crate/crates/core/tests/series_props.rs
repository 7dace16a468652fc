mod common;

use num_rational::BigRational;
use proptest::prelude::*;
use splitkit::series::{double_commutator_bba, Alphabet, Series, SeriesError};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms((x, y, z) in common::triple()) {
        common::ring_axioms(&x, &y, &z)?;
    }

    #[test]
    fn exp_log_round_trip(x in common::nilpotent()) {
        common::exp_log_round_trip(&x)?;
    }

    #[test]
    fn grading_bounds((x, y, _z) in common::triple()) {
        common::grading_bounds(&x, &y)?;
    }

    #[test]
    fn commutator_laws((x, y, z) in common::triple()) {
        common::commutator_laws(&x, &y, &z)?;
    }

    #[test]
    fn reversal_reverses_products((x, y, _z) in common::triple()) {
        common::reversal_anti_automorphism(&x, &y)?;
    }
}

#[test]
fn double_commutator_matches_nested_brackets() {
    let alpha = Alphabet::two_letter();
    let a = Series::generator(alpha.clone(), 4, "A").unwrap();
    let b = Series::generator(alpha.clone(), 4, "B").unwrap();
    let nested = b.commutator(&b.commutator(&a).unwrap()).unwrap();
    assert_eq!(double_commutator_bba(&alpha, 4).unwrap(), nested);
    assert_eq!(nested.reverse_words(), nested);
}

#[test]
fn exp_of_sum_of_commuting_letters() {
    // exp(A)exp(A) = exp(2A)
    let alpha = Alphabet::two_letter();
    let a = Series::generator(alpha, 5, "A").unwrap();
    let two = BigRational::from_integer(2.into());
    assert_eq!(a.exp().unwrap().mul(&a.exp().unwrap()).unwrap(), a.scale(&two).exp().unwrap());
}

#[test]
fn domain_errors() {
    let alpha = Alphabet::two_letter();
    let one = Series::one(alpha.clone(), 3).unwrap();
    assert_eq!(one.exp(), Err(SeriesError::NonzeroConstantTerm));
    assert_eq!(Series::zero(alpha.clone(), 3).unwrap().log(), Err(SeriesError::ConstantTermNotOne));
    let other = Series::one(alpha, 4).unwrap();
    assert_eq!(one.mul(&other), Err(SeriesError::TruncationMismatch(3, 4)));
    let poly = Series::one(Alphabet::polynomial_t(1), 3).unwrap();
    assert_eq!(one.add(&poly), Err(SeriesError::AlphabetMismatch));
}
